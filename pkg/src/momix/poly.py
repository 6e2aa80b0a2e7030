"""Sparse multivariate polynomials over an exact field.

Conventions: the ambient space of linear forms is graded in internal
degree 2, so a polynomial of ordinary degree k is homogeneous of internal
degree 2k.  All module-level degree bookkeeping in this package is in
internal degrees.

Text format: ``3*x1^2*x2 - 1/2*x3 + (1+2r)*x4`` with scalars as in
:mod:`momix.scalars`.
"""

from __future__ import annotations

import itertools
import re
from functools import lru_cache

from .errors import ValidationError, ZeroLabel
from .scalars import Field


class PolyRing:
    """Polynomial ring descriptor: field + ordered variables."""

    def __init__(self, field: Field, nvars: int, names=None):
        self.field = field
        self.nvars = nvars
        self.names = tuple(names) if names else tuple("x%d" % (i + 1) for i in range(nvars))
        if len(self.names) != nvars:
            raise ValidationError("expected %d variable names" % nvars)
        self._mono_cache = {}

    def __eq__(self, other):
        return (isinstance(other, PolyRing) and self.field == other.field
                and self.nvars == other.nvars and self.names == other.names)

    def __hash__(self):
        return hash((self.field, self.nvars, self.names))

    def __repr__(self):
        return "PolyRing(%s, vars=%s)" % (self.field.kind, ",".join(self.names))

    def monomials(self, polydeg: int, exclude: int | None = None):
        """All exponent tuples of total degree ``polydeg``, optionally with
        a forbidden variable; descending lexicographic order (deterministic)."""
        key = (polydeg, exclude)
        if key not in self._mono_cache:
            if polydeg < 0:
                monos = ()
            else:
                idxs = [i for i in range(self.nvars) if i != exclude]
                monos = []
                for combo in itertools.combinations_with_replacement(idxs, polydeg):
                    e = [0] * self.nvars
                    for i in combo:
                        e[i] += 1
                    monos.append(tuple(e))
                monos = tuple(sorted(monos, reverse=True))
            self._mono_cache[key] = monos
        return self._mono_cache[key]

    def dim_piece(self, internal_degree: int, exclude: int | None = None) -> int:
        """k-dimension of the internal-degree piece of R (or R with one
        variable eliminated)."""
        if internal_degree < 0 or internal_degree % 2:
            return 0
        return len(self.monomials(internal_degree // 2, exclude))

    # -- constructors ----------------------------------------------------

    def zero(self):
        return Poly(self, {})

    def one(self):
        return Poly(self, {(0,) * self.nvars: self.field.one})

    def var(self, i: int):
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): self.field.one})

    def const(self, c):
        c = self.field.of(c)
        if not c:
            return self.zero()
        return Poly(self, {(0,) * self.nvars: c})

    def linear(self, coeffs):
        """Linear form sum_i coeffs[i] * x_i (internal degree 2)."""
        terms = {}
        for i, c in enumerate(coeffs):
            c = self.field.of(c)
            if c:
                e = [0] * self.nvars
                e[i] = 1
                terms[tuple(e)] = c
        return Poly(self, terms)

    def monomial(self, exps, coeff=1):
        c = self.field.of(coeff)
        if not c:
            return self.zero()
        return Poly(self, {tuple(exps): c})


class Poly:
    """Homogeneous-friendly sparse polynomial; terms map exponent tuples
    to nonzero field scalars."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def internal_degree(self):
        """Internal degree if homogeneous and nonzero, else None for 0;
        raises for inhomogeneous input."""
        if not self.terms:
            return None
        degs = {sum(e) for e in self.terms}
        if len(degs) != 1:
            raise ValidationError("polynomial is not homogeneous: %s" % self)
        return 2 * degs.pop()

    def coeff(self, exps):
        return self.terms.get(tuple(exps), self.ring.field.zero)

    def linear_coeffs(self):
        """Coefficient vector of a linear form."""
        out = [self.ring.field.zero] * self.ring.nvars
        for e, c in self.terms.items():
            if sum(e) != 1:
                raise ValidationError("not a linear form: %s" % self)
            out[e.index(1)] = c
        return out

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e)
            if s is None:
                terms[e] = c
            else:
                s = s + c
                if s:
                    terms[e] = s
                else:
                    del terms[e]
        return Poly(self.ring, terms)

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly):
            out = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    c = c1 * c2
                    s = out.get(e)
                    if s is None:
                        if c:
                            out[e] = c
                    else:
                        s = s + c
                        if s:
                            out[e] = s
                        else:
                            del out[e]
            return Poly(self.ring, out)
        c = self.ring.field.of(other)
        if not c:
            return self.ring.zero()
        return Poly(self.ring, {e: cc * c for e, cc in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- substitution -----------------------------------------------------

    def subst_var(self, j: int, repl: "Poly") -> "Poly":
        """Substitute x_j := repl (a polynomial)."""
        ring = self.ring
        out = ring.zero()
        powers = {0: ring.one()}
        for e, c in sorted(self.terms.items(), reverse=True):
            k = e[j]
            if k not in powers:
                p = powers[max(powers)]
                for _ in range(max(powers), k):
                    p = p * repl
                    powers[max(powers) + 1] = p
            rest = list(e)
            rest[j] = 0
            out = out + ring.monomial(tuple(rest), c) * powers[k]
        return out

    def subst_linear(self, rows) -> "Poly":
        """Substitute x_k := sum_j rows[k][j] * x_j simultaneously."""
        ring = self.ring
        images = [ring.linear(rows[k]) for k in range(ring.nvars)]
        out = ring.zero()
        for e, c in sorted(self.terms.items(), reverse=True):
            t = ring.const(c)
            for k, p in enumerate(e):
                for _ in range(p):
                    t = t * images[k]
            out = out + t
        return out

    # -- printing / parsing -------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        field = self.ring.field
        bits = []
        for e in sorted(self.terms, key=lambda t: (sum(t), t), reverse=True):
            c = self.terms[e]
            mono = "*".join(
                self.ring.names[i] + ("^%d" % p if p > 1 else "")
                for i, p in enumerate(e) if p
            )
            cs = field.fmt(c)
            if mono:
                if cs == "1":
                    s = mono
                elif cs == "-1":
                    s = "-" + mono
                else:
                    s = cs + "*" + mono
            else:
                s = cs
            bits.append(s)
        out = bits[0]
        for s in bits[1:]:
            out += " - " + s[1:] if s.startswith("-") else " + " + s
        return out

    def __repr__(self):
        return "Poly(%s)" % self


_TERM_SPLIT = re.compile(r"(?<![(+\-*/^])\s*([+-])\s*(?![^(]*\))")


def parse_poly(ring: PolyRing, text: str) -> Poly:
    """Parse the canonical polynomial text format."""
    text = text.strip()
    if text in ("0", ""):
        return ring.zero()
    name_to_idx = {n: i for i, n in enumerate(ring.names)}
    # split into signed terms, respecting parenthesized scalars
    terms = []
    depth = 0
    cur = ""
    sign = 1
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip() and not cur.rstrip().endswith(("*", "^", "/")):
            terms.append((sign, cur.strip()))
            sign = 1 if ch == "+" else -1
            cur = ""
        else:
            cur += ch
    if cur.strip():
        terms.append((sign, cur.strip()))
    out = ring.zero()
    for sgn, term in terms:
        coeff = ring.field.one
        exps = [0] * ring.nvars
        neg = False
        body = term
        while body.startswith("-"):
            neg = not neg
            body = body[1:].strip()
        for factor in filter(None, (f.strip() for f in body.split("*"))):
            if "^" in factor:
                base, p = factor.split("^")
                p = int(p)
            else:
                base, p = factor, 1
            base = base.strip()
            if base in name_to_idx:
                exps[name_to_idx[base]] += p
            else:
                c = ring.field.parse(base)
                for _ in range(p):
                    coeff = coeff * c
        if neg:
            coeff = -coeff
        if sgn < 0:
            coeff = -coeff
        out = out + ring.monomial(tuple(exps), coeff)
    return out


def reduce_mod_linear(p: Poly, alpha: Poly) -> Poly:
    """Canonical representative of p in R/(alpha) for a linear form alpha.

    Eliminates the largest-index variable carried by alpha; idempotent.
    """
    if alpha.is_zero():
        raise ZeroLabel("reduction modulo the zero form")
    coeffs = alpha.linear_coeffs()
    j = max(i for i, c in enumerate(coeffs) if c)
    c = coeffs[j]
    rest = [(-(ci) / c if not isinstance(ci, int) else -ci / c) for ci in coeffs]
    rest[j] = p.ring.field.zero
    repl = p.ring.linear(rest)
    if not any(e[j] for e in p.terms):
        return p
    return p.subst_var(j, repl)


def lead_var_of_linear(alpha: Poly) -> int:
    """Index of the variable a linear reduction eliminates."""
    coeffs = alpha.linear_coeffs()
    return max(i for i, c in enumerate(coeffs) if c)

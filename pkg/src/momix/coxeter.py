"""Coxeter systems, exact reflection realizations, Bruhat combinatorics,
and the Kazhdan-Lusztig polynomial oracle.

Group elements are carried as exact matrices of a fixed realization, so
equality is matrix equality and the word problem never enters.  The
geometric representation is built from the Coxeter matrix with Cartan
entries -2cos(pi/m); m in {2,3} needs only the rationals, m = 4 lives over
Q(sqrt 2), m = 6 over Q(sqrt 3), m = 5 over Q(sqrt 5).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (InvariantError, NotComparable, NotReflectionFaithful,
                     OrderBoundExceeded, ValidationError)
from .linalg import mat_inv, mat_mul, rank
from .poly import Poly, PolyRing
from .scalars import Field, Quad

DEFAULT_ORDER_BOUND = 1200


@dataclass(frozen=True)
class CoxeterSystem:
    gens: tuple[str, ...]
    m: tuple[tuple[int, ...], ...]
    order_bound: int = DEFAULT_ORDER_BOUND

    def __post_init__(self):
        n = len(self.gens)
        if len(set(self.gens)) != n:
            raise ValidationError("generator names must be distinct")
        if len(self.m) != n or any(len(r) != n for r in self.m):
            raise ValidationError("Coxeter matrix shape mismatch")
        for i in range(n):
            if self.m[i][i] != 1:
                raise ValidationError("Coxeter matrix diagonal must be 1")
            for j in range(n):
                if self.m[i][j] != self.m[j][i]:
                    raise ValidationError("Coxeter matrix must be symmetric")
                if i != j and self.m[i][j] < 2:
                    raise ValidationError("off-diagonal entries must be >= 2")

    @property
    def nvars(self):
        return len(self.gens)


_NAMED_TYPES = {
    "A1": (("s",), ((1,),)),
    "A2": (("s", "t"), ((1, 3), (3, 1))),
    "B2": (("s", "t"), ((1, 4), (4, 1))),
    "A3": (("s1", "s2", "s3"), ((1, 3, 2), (3, 1, 3), (2, 3, 1))),
}


def named_system(name: str, order_bound: int = DEFAULT_ORDER_BOUND) -> CoxeterSystem:
    if name not in _NAMED_TYPES:
        raise ValidationError("unknown Coxeter type %r (have %s)"
                              % (name, ", ".join(sorted(_NAMED_TYPES))))
    gens, m = _NAMED_TYPES[name]
    return CoxeterSystem(gens, m, order_bound)


def _field_for(system: CoxeterSystem) -> Field:
    need = set()
    for i in range(system.nvars):
        for j in range(i + 1, system.nvars):
            mij = system.m[i][j]
            if mij in (2, 3):
                continue
            elif mij == 4:
                need.add(2)
            elif mij == 6:
                need.add(3)
            elif mij == 5:
                need.add(5)
            else:
                raise ValidationError("no exact quadratic field for m = %d" % mij)
    if not need:
        return Field("rational")
    if len(need) > 1:
        raise ValidationError("mixed quadratic extensions %s not supported" % sorted(need))
    return Field("quadratic", need.pop())


def _cartan_entry(field: Field, mij: int):
    """-2cos(pi/m) as an exact scalar."""
    if mij == 1:
        return field.of(2)
    if mij == 2:
        return field.of(0)
    if mij == 3:
        return field.of(-1)
    if mij == 4:
        return Quad(0, -1, 2)
    if mij == 6:
        return Quad(0, -1, 3)
    if mij == 5:
        return Quad(Fraction(-1, 2), Fraction(-1, 2), 5)
    raise ValidationError("no exact Cartan entry for m = %d" % mij)


class Realization:
    """An exact representation of (W, S): action matrices on V together
    with the simple covectors alpha_s in V*."""

    def __init__(self, system: CoxeterSystem, ring: PolyRing, action, alphas):
        self.system = system
        self.ring = ring
        self.action = tuple(tuple(tuple(row) for row in a) for a in action)
        self.alphas = tuple(alphas)
        n = ring.nvars
        for a in self.action:
            if len(a) != n or any(len(r) != n for r in a):
                raise ValidationError("action matrix shape mismatch")
            if mat_mul(a, a, ring.field) != [[ring.field.one if i == j else ring.field.zero
                                              for j in range(n)] for i in range(n)]:
                raise ValidationError("generator action is not an involution")
        for al in self.alphas:
            if al.is_zero():
                raise ValidationError("simple covector alpha_s = 0")

    @property
    def dim(self):
        return self.ring.nvars

    def identity_matrix(self):
        f = self.ring.field
        n = self.dim
        return tuple(tuple(f.one if i == j else f.zero for j in range(n)) for i in range(n))


def geometric_realization(system: CoxeterSystem, field: Field | None = None) -> Realization:
    """The geometric representation on V = span(e_s) with
    s(e_t) = e_t - a_{st} e_s and alpha_s = sum_t a_{st} x_t."""
    if field is None:
        field = _field_for(system)
    n = system.nvars
    ring = PolyRing(field, n)
    cartan = [[field.of(_cartan_entry(field, system.m[i][j]))
               for j in range(n)] for i in range(n)]
    action = []
    for s in range(n):
        a = [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]
        for t in range(n):
            a[s][t] = a[s][t] - cartan[s][t]
        action.append(a)
    alphas = [ring.linear(cartan[s]) for s in range(n)]
    return Realization(system, ring, action, alphas)


class CoxeterElement:
    """Group element as an exact matrix plus one cached reduced word."""

    __slots__ = ("matrix", "inv_matrix", "word", "length", "index")

    def __init__(self, matrix, inv_matrix, word, index):
        self.matrix = matrix
        self.inv_matrix = inv_matrix
        self.word = word
        self.length = len(word)
        self.index = index

    def __eq__(self, other):
        return isinstance(other, CoxeterElement) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return "<%s>" % (self.word_str() or "e")

    def word_str(self, gens=None, sep=None):
        if not self.word:
            return "e"
        if gens is None:
            return ".".join(str(i) for i in self.word)
        names = [gens[i] for i in self.word]
        if sep is None:
            sep = "" if all(len(g) == 1 for g in gens) else "."
        return sep.join(names)


class CoxeterGroup:
    """Finite Coxeter group enumerated breadth-first by length."""

    def __init__(self, realization: Realization):
        self.realization = realization
        self.system = realization.system
        self.field = realization.ring.field
        self.elements: list[CoxeterElement] = []
        self._by_matrix: dict = {}
        self.rmult: list[list[int]] = []
        self.lmult: list[list[int]] = []
        self._leq_memo: dict = {}
        self._kl_memo: dict = {}
        self._reflections = None
        self._labels = None
        self._enumerate()

    # -- enumeration ------------------------------------------------------

    def _enumerate(self):
        bound = self.system.order_bound
        ident = self.realization.identity_matrix()
        e = CoxeterElement(ident, ident, (), 0)
        self.elements.append(e)
        self._by_matrix[ident] = 0
        frontier = [0]
        gen_mats = self.realization.action
        while frontier:
            new_frontier = []
            for idx in frontier:
                w = self.elements[idx]
                for s, a in enumerate(gen_mats):
                    m = tuple(tuple(r) for r in mat_mul(w.matrix, a, self.field))
                    if m in self._by_matrix:
                        continue
                    minv = tuple(tuple(r) for r in mat_mul(a, w.inv_matrix, self.field))
                    el = CoxeterElement(m, minv, w.word + (s,), len(self.elements))
                    self.elements.append(el)
                    self._by_matrix[m] = el.index
                    new_frontier.append(el.index)
                    if len(self.elements) > bound:
                        raise OrderBoundExceeded(
                            "enumeration exceeded the order bound %d" % bound)
            frontier = new_frontier
        n = len(self.elements)
        gens = [self.element_of_word((s,)) for s in range(len(gen_mats))]
        self.rmult = [[self._by_matrix[tuple(tuple(r) for r in
                                             mat_mul(w.matrix, g.matrix, self.field))]
                       for g in gens] for w in self.elements]
        self.lmult = [[self._by_matrix[tuple(tuple(r) for r in
                                             mat_mul(g.matrix, w.matrix, self.field))]
                       for g in gens] for w in self.elements]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def identity(self):
        return self.elements[0]

    def element_of_word(self, word) -> CoxeterElement:
        m = self.realization.identity_matrix()
        for s in word:
            if not 0 <= s < self.system.nvars:
                raise ValidationError("bad generator index %r" % (s,))
            m = tuple(tuple(r) for r in mat_mul(m, self.realization.action[s], self.field))
        idx = self._by_matrix.get(m)
        if idx is None:
            raise InvariantError("word leads outside the enumerated group")
        return self.elements[idx]

    def parse_word(self, text: str):
        """Generator-index word from a name string like 'sts', 's1.s2' or 's,t,s'."""
        text = text.strip()
        if text in ("e", "1", ""):
            return ()
        gens = self.system.gens
        name_to_idx = {g: i for i, g in enumerate(gens)}
        for sep in (",", ".", "*", " "):
            if sep in text:
                parts = [p for p in (q.strip() for q in text.split(sep)) if p]
                break
        else:
            if all(len(g) == 1 for g in gens):
                parts = list(text)
            else:
                parts = [text]
        word = []
        for p in parts:
            if p not in name_to_idx:
                raise ValidationError("unknown generator %r (have %s)" % (p, ",".join(gens)))
            word.append(name_to_idx[p])
        return tuple(word)

    def longest(self) -> CoxeterElement:
        top = max(w.length for w in self.elements)
        cands = [w for w in self.elements if w.length == top]
        if len(cands) != 1:
            raise InvariantError("longest element is not unique")
        return cands[0]

    def mul(self, x: CoxeterElement, y: CoxeterElement) -> CoxeterElement:
        m = tuple(tuple(r) for r in mat_mul(x.matrix, y.matrix, self.field))
        return self.elements[self._by_matrix[m]]

    def inverse(self, x: CoxeterElement) -> CoxeterElement:
        return self.elements[self._by_matrix[x.inv_matrix]]

    def right(self, x: CoxeterElement, s: int) -> CoxeterElement:
        return self.elements[self.rmult[x.index][s]]

    def left(self, x: CoxeterElement, s: int) -> CoxeterElement:
        return self.elements[self.lmult[x.index][s]]

    def act_on_poly(self, w: CoxeterElement, f: Poly) -> Poly:
        """Contragredient action on Sym(V*): (w.f)(v) = f(w^{-1} v)."""
        if not w.word:
            return f
        return f.subst_linear(w.inv_matrix)

    # -- Bruhat order -------------------------------------------------------

    def bruhat_leq(self, x: CoxeterElement, y: CoxeterElement) -> bool:
        """x <= y via the lifting property, equivalent to the subword test."""
        key = (x.index, y.index)
        memo = self._leq_memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        if x.length > y.length:
            out = False
        elif x.index == y.index:
            out = True
        elif x.length == y.length:
            out = False
        else:
            s = y.word[-1]
            ys = self.right(y, s)
            xs = self.right(x, s)
            if xs.length < x.length:
                out = self.bruhat_leq(xs, ys)
            else:
                out = self.bruhat_leq(x, ys)
        memo[key] = out
        return out

    # -- reflections & labels -----------------------------------------------

    def reflections(self):
        """All reflections w s w^{-1}, each with the first (w, s) found in
        enumeration order; sorted by (length, word)."""
        if self._reflections is None:
            found = {}
            for w in self.elements:
                for s in range(self.system.nvars):
                    m = mat_mul(mat_mul(w.matrix, self.realization.action[s], self.field),
                                w.inv_matrix, self.field)
                    m = tuple(tuple(r) for r in m)
                    idx = self._by_matrix[m]
                    if idx not in found:
                        found[idx] = (w, s)
            refl = sorted(found, key=lambda i: (self.elements[i].length, self.elements[i].word))
            self._reflections = [(self.elements[i], found[i]) for i in refl]
        return self._reflections

    def reflection_label(self, t: CoxeterElement) -> Poly:
        """Canonical covector vanishing on the fixed space of the reflection t.

        For a simple reflection this is the declared alpha_s; otherwise
        w.alpha_s for the first conjugating pair, sign-normalized so the
        first nonzero coefficient is positive.
        """
        if self._labels is None:
            labels = {}
            for el, (w, s) in self.reflections():
                if el.length == 1:
                    labels[el.index] = self.realization.alphas[el.word[0]]
                    continue
                f = self.act_on_poly(w, self.realization.alphas[s])
                coeffs = f.linear_coeffs()
                lead = next(c for c in coeffs if c)
                if not self.field.is_positive(lead):
                    f = -f
                labels[el.index] = f
            self._labels = labels
        if t.index not in self._labels:
            raise ValidationError("%r is not a reflection" % (t,))
        return self._labels[t.index]

    def is_reflection(self, w: CoxeterElement) -> bool:
        self.reflections()
        if self._labels is None:
            self.reflection_label(self.reflections()[0][0])
        return w.index in self._labels

    # -- cosets ---------------------------------------------------------------

    def coset_data(self, s: int):
        """Cosets of W/W_s: list of dicts with rep (minimal), other, d;
        plus the induced order via minimal representatives."""
        seen = set()
        cosets = []
        for w in self.elements:
            if w.index in seen:
                continue
            ws = self.right(w, s)
            seen.add(w.index)
            seen.add(ws.index)
            rep, other = (w, ws) if w.length < ws.length else (ws, w)
            cosets.append({"rep": rep, "other": other, "d": rep.length})
        cosets.sort(key=lambda c: (c["d"], c["rep"].word))
        return cosets

    # -- reflection faithfulness ------------------------------------------------

    def check_reflection_faithful(self):
        """True iff braid orders hold and corank(w - 1) = 1 exactly on
        reflections; returns (ok, witness)."""
        f = self.field
        n = self.realization.dim
        for i in range(self.system.nvars):
            for j in range(i + 1, self.system.nvars):
                prod = mat_mul(self.realization.action[i], self.realization.action[j], f)
                m = [row[:] for row in prod]
                order = 1
                ident = [list(r) for r in self.realization.identity_matrix()]
                while m != ident:
                    m = mat_mul(m, prod, f)
                    order += 1
                    if order > 2 * self.system.m[i][j]:
                        break
                if order != self.system.m[i][j]:
                    return False, self.element_of_word((i, j))
        self.reflections()
        self.reflection_label(self.reflections()[0][0])
        for w in self.elements:
            if not w.word:
                continue
            diff = [[w.matrix[i][j] - (f.one if i == j else f.zero) for j in range(n)]
                    for i in range(n)]
            # the fixed space ker(w - 1) has codimension rank(w - 1)
            if (rank(diff) == 1) != self.is_reflection(w):
                return False, w
        return True, None


def require_reflection_faithful(group: CoxeterGroup):
    ok, witness = group.check_reflection_faithful()
    if not ok:
        raise NotReflectionFaithful("realization is not reflection faithful", witness)


# -- Kazhdan-Lusztig oracle -----------------------------------------------------


class KLPolynomial:
    """Polynomial in q with integer coefficients (index = power)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=(1,)):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @staticmethod
    def zero():
        return KLPolynomial(())

    @staticmethod
    def one():
        return KLPolynomial((1,))

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = KLPolynomial((other,))
        return isinstance(other, KLPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return KLPolynomial(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                                  for i in range(n)))

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c: int):
        return KLPolynomial(tuple(c * x for x in self.coeffs))

    def shift(self, k: int):
        """Multiply by q^k."""
        if not self.coeffs:
            return self
        if k < 0:
            if any(self.coeffs[:(-k)]):
                raise InvariantError("negative q-shift loses terms")
            return KLPolynomial(self.coeffs[-k:])
        return KLPolynomial((0,) * k + self.coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else -1

    def coeff(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def constant_term(self) -> int:
        return self.coeff(0)

    def __str__(self):
        if not self.coeffs:
            return "0"
        bits = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                bits.append(str(c))
            else:
                q = "q" if k == 1 else "q^%d" % k
                bits.append(q if c == 1 else "%d*%s" % (c, q))
        return " + ".join(bits)

    __repr__ = __str__


def kl_polynomial(group: CoxeterGroup, x: CoxeterElement, w: CoxeterElement) -> KLPolynomial:
    """P_{x,w} by the classical recursion with mu-corrections; memoized."""
    if not group.bruhat_leq(x, w):
        raise NotComparable("x is not <= w in Bruhat order")
    return _kl(group, x.index, w.index)


def _kl(group: CoxeterGroup, xi: int, wi: int) -> KLPolynomial:
    memo = group._kl_memo
    key = (xi, wi)
    hit = memo.get(key)
    if hit is not None:
        return hit
    x, w = group.elements[xi], group.elements[wi]
    if not group.bruhat_leq(x, w):
        out = KLPolynomial.zero()
    elif xi == wi:
        out = KLPolynomial.one()
    else:
        s = w.word[0]  # left descent: s w < w for the first letter
        v = group.left(w, s)
        assert v.length == w.length - 1
        sx = group.left(x, s)
        c = 1 if sx.length < x.length else 0
        out = _kl(group, sx.index, v.index).shift(1 - c) + _kl(group, xi, v.index).shift(c)
        for z in group.elements:
            if z.length >= v.length or not group.bruhat_leq(x, z) or not group.bruhat_leq(z, v):
                continue
            if group.left(z, s).length > z.length:
                continue
            gap = v.length - z.length - 1
            if gap < 0 or gap % 2:
                continue
            mu = _kl(group, z.index, v.index).coeff(gap // 2)
            if mu:
                out = out - _kl(group, xi, z.index).scale(mu).shift((w.length - z.length) // 2)
    memo[key] = out
    return out

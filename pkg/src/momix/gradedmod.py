"""Graded free modules, their label-quotients, and degreewise linear algebra.

A module is a finite sum of shifted copies of the polynomial ring,
``⊕_k R{n_k}``, with the shift convention ``M{n}^i = M^{i+n}``: the
generator of ``R{n}`` sits in internal degree ``-n``.  An optional linear
annihilator alpha turns the module into ``⊕_k (R/alpha){n_k}`` with
canonical representatives obtained by eliminating alpha's largest
variable.

A homogeneous map of internal shift delta sends degree d to degree
d + delta; its (i, j) entry is a homogeneous polynomial of internal
degree ``tgt.shifts[i] - src.shifts[j] + delta``.
"""

from __future__ import annotations

from .errors import InvariantError, ValidationError, WindowNotStabilized
from .linalg import Echelon, kernel_basis, solve
from .poly import Poly, PolyRing, lead_var_of_linear, reduce_mod_linear


class FreeModule:
    """⊕_k R{n_k}, or ⊕_k (R/alpha){n_k} when alpha is given."""

    __slots__ = ("ring", "shifts", "alpha", "_lead", "_redcache", "_piece_cache")

    def __init__(self, ring: PolyRing, shifts, alpha: Poly | None = None):
        self.ring = ring
        self.shifts = tuple(shifts)
        self.alpha = alpha
        if alpha is not None:
            if alpha.is_zero():
                raise ValidationError("zero annihilator")
            if alpha.internal_degree() != 2:
                raise ValidationError("annihilator must be a linear form")
            self._lead = lead_var_of_linear(alpha)
        else:
            self._lead = None
        self._redcache = {}
        self._piece_cache = {}

    @property
    def rank(self) -> int:
        return len(self.shifts)

    def is_zero(self) -> bool:
        return not self.shifts

    def twist(self, n: int) -> "FreeModule":
        return FreeModule(self.ring, tuple(s + n for s in self.shifts), self.alpha)

    def __repr__(self):
        base = "R/(%s)" % self.alpha if self.alpha is not None else "R"
        return "⊕".join("%s{%d}" % (base, n) for n in self.shifts) or "0"

    def __eq__(self, other):
        return (isinstance(other, FreeModule) and self.ring == other.ring
                and self.shifts == other.shifts and self.alpha == other.alpha)

    def __hash__(self):
        return hash((self.ring, self.shifts, self.alpha))

    # -- degree pieces -----------------------------------------------------

    def graded_dim(self, d: int) -> int:
        return sum(self.ring.dim_piece(d + n, self._lead) for n in self.shifts)

    def min_gen_degree(self):
        return min((-n for n in self.shifts), default=0)

    def max_gen_degree(self):
        return max((-n for n in self.shifts), default=0)

    def piece_basis(self, d: int):
        """Ordered basis [(slot k, exponent tuple)] of the degree-d piece."""
        if d not in self._piece_cache:
            basis = []
            for k, n in enumerate(self.shifts):
                dd = d + n
                if dd >= 0 and dd % 2 == 0:
                    for mono in self.ring.monomials(dd // 2, self._lead):
                        basis.append((k, mono))
            self._piece_cache[d] = tuple(basis)
        return self._piece_cache[d]

    def reduce(self, p: Poly) -> Poly:
        if self.alpha is None or p.is_zero():
            return p
        if not any(e[self._lead] for e in p.terms):
            return p
        return reduce_mod_linear(p, self.alpha)

    def reduce_elem(self, elem):
        return tuple(self.reduce(p) for p in elem)

    def zero_elem(self):
        z = self.ring.zero()
        return tuple(z for _ in self.shifts)

    def gen_elem(self, k: int):
        out = [self.ring.zero()] * self.rank
        out[k] = self.ring.one()
        return tuple(out)

    def elem_degree(self, elem):
        degs = set()
        for k, p in enumerate(elem):
            if p:
                degs.add(p.internal_degree() - self.shifts[k])
        if not degs:
            return None
        if len(degs) != 1:
            raise ValidationError("inhomogeneous element")
        return degs.pop()

    def coords(self, elem, d: int):
        """Coordinates of a degree-d element w.r.t. piece_basis(d)."""
        zero = self.ring.field.zero
        out = []
        for k, mono in self.piece_basis(d):
            out.append(elem[k].terms.get(mono, zero))
        return out

    def from_coords(self, coords, d: int):
        comps = [dict() for _ in self.shifts]
        for (k, mono), c in zip(self.piece_basis(d), coords):
            if c:
                comps[k][mono] = c
        return tuple(Poly(self.ring, t) for t in comps)

    def mono_reduced(self, mono):
        """Canonical representative of a monomial modulo alpha (cached)."""
        if self.alpha is None:
            return Poly(self.ring, {mono: self.ring.field.one})
        r = self._redcache.get(mono)
        if r is None:
            r = self.reduce(Poly(self.ring, {mono: self.ring.field.one}))
            self._redcache[mono] = r
        return r


def direct_sum(modules):
    mods = [m for m in modules]
    if not mods:
        raise ValidationError("empty direct sum needs a ring")
    ring = mods[0].ring
    alphas = {m.alpha for m in mods if m.rank}
    if len(alphas) > 1:
        raise ValidationError("direct sum of modules with different annihilators")
    alpha = alphas.pop() if alphas else None
    shifts = tuple(s for m in mods for s in m.shifts)
    return FreeModule(ring, shifts, alpha)


class ModMap:
    """Homogeneous map between graded modules, entries as polynomials."""

    __slots__ = ("src", "tgt", "delta", "entries", "_degmat")

    def __init__(self, src: FreeModule, tgt: FreeModule, delta: int, entries, check=True):
        self.src = src
        self.tgt = tgt
        self.delta = delta
        self.entries = [[tgt.reduce(p) for p in row] for row in entries]
        self._degmat = {}
        if len(self.entries) != tgt.rank or any(len(r) != src.rank for r in self.entries):
            raise ValidationError("entry matrix shape mismatch")
        if check:
            self.check_homogeneous()

    def check_homogeneous(self):
        for i in range(self.tgt.rank):
            for j in range(self.src.rank):
                p = self.entries[i][j]
                if p.is_zero():
                    continue
                want = self.tgt.shifts[i] - self.src.shifts[j] + self.delta
                if p.internal_degree() != want:
                    raise InvariantError(
                        "entry (%d,%d) has degree %d, expected %d"
                        % (i, j, p.internal_degree(), want))

    @staticmethod
    def zero(src, tgt, delta=0):
        z = src.ring.zero()
        return ModMap(src, tgt, delta, [[z] * src.rank for _ in range(tgt.rank)], check=False)

    @staticmethod
    def identity(mod):
        one = mod.ring.one()
        z = mod.ring.zero()
        return ModMap(mod, mod, 0,
                      [[one if i == j else z for j in range(mod.rank)] for i in range(mod.rank)],
                      check=False)

    def is_zero(self):
        return all(p.is_zero() for row in self.entries for p in row)

    def apply(self, elem):
        out = []
        for i in range(self.tgt.rank):
            s = self.src.ring.zero()
            for j in range(self.src.rank):
                if self.entries[i][j] and elem[j]:
                    s = s + self.entries[i][j] * elem[j]
            out.append(self.tgt.reduce(s))
        return tuple(out)

    def compose(self, other: "ModMap") -> "ModMap":
        """self ∘ other."""
        if other.tgt != self.src:
            raise ValidationError("composition mismatch")
        ring = self.src.ring
        z = ring.zero()
        out = [[z] * other.src.rank for _ in range(self.tgt.rank)]
        for i in range(self.tgt.rank):
            for j in range(other.src.rank):
                s = z
                for k in range(self.src.rank):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if a and b:
                        s = s + a * b
                out[i][j] = s
        return ModMap(other.src, self.tgt, self.delta + other.delta, out, check=False)

    def add(self, other: "ModMap") -> "ModMap":
        if other.src != self.src or other.tgt != self.tgt or other.delta != self.delta:
            raise ValidationError("sum mismatch")
        return ModMap(self.src, self.tgt, self.delta,
                      [[a + b for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.entries, other.entries)], check=False)

    def scale(self, c) -> "ModMap":
        return ModMap(self.src, self.tgt, self.delta,
                      [[p * c for p in row] for row in self.entries], check=False)

    def scale_poly(self, q: Poly) -> "ModMap":
        d = q.internal_degree()
        if d is None:
            return ModMap.zero(self.src, self.tgt, self.delta)
        return ModMap(self.src, self.tgt, self.delta + d,
                      [[p * q for p in row] for row in self.entries], check=False)

    def neg(self):
        return ModMap(self.src, self.tgt, self.delta,
                      [[-p for p in row] for row in self.entries], check=False)

    def twist(self, n: int) -> "ModMap":
        """The same map between the n-twisted modules."""
        return ModMap(self.src.twist(n), self.tgt.twist(n), self.delta, self.entries, check=False)

    def retarget(self, src: FreeModule, tgt: FreeModule) -> "ModMap":
        """Reinterpret the entry matrix between equal-shape modules."""
        return ModMap(src, tgt, self.delta, self.entries)

    def degree_matrix(self, d: int):
        """Field matrix of the induced map on degree pieces, as columns
        indexed by src.piece_basis(d), rows by tgt.piece_basis(d+delta);
        stored row-major (list of rows)."""
        if d in self._degmat:
            return self._degmat[d]
        src_basis = self.src.piece_basis(d)
        tgt_basis = self.tgt.piece_basis(d + self.delta)
        tgt_index = {bm: idx for idx, bm in enumerate(tgt_basis)}
        zero = self.src.ring.field.zero
        cols = []
        for (j, mono) in src_basis:
            col = [zero] * len(tgt_basis)
            for i in range(self.tgt.rank):
                p = self.entries[i][j]
                if not p:
                    continue
                for e, c in p.terms.items():
                    prod = tuple(a + b for a, b in zip(e, mono))
                    red = self.tgt.mono_reduced(prod)
                    for ee, cc in red.terms.items():
                        idx = tgt_index.get((i, ee))
                        if idx is not None:
                            col[idx] = col[idx] + c * cc
            cols.append(col)
        rows = [[cols[j][i] for j in range(len(cols))] for i in range(len(tgt_basis))]
        self._degmat[d] = rows
        return rows

    def kernel_in_degree(self, d: int):
        """Exact basis (list of src elements) of the kernel on degree d."""
        src_basis = self.src.piece_basis(d)
        if not src_basis:
            return []
        rows = self.degree_matrix(d)
        vecs = kernel_basis(rows, len(src_basis), self.src.ring.field)
        return [self.src.from_coords(v, d) for v in vecs]

    def __repr__(self):
        return "ModMap(%s -> %s, delta=%d)" % (self.src, self.tgt, self.delta)


def block_map(src_mods, tgt_mods, blocks, delta=0):
    """Assemble a ModMap from a grid of blocks (None = zero block)."""
    src = direct_sum(src_mods)
    tgt = direct_sum(tgt_mods)
    z = src.ring.zero()
    entries = [[z] * src.rank for _ in range(tgt.rank)]
    ro = 0
    for bi, tm in enumerate(tgt_mods):
        co = 0
        for bj, sm in enumerate(src_mods):
            blk = blocks[bi][bj]
            if blk is not None:
                if blk.delta != delta:
                    raise ValidationError("block delta mismatch")
                for i in range(tm.rank):
                    for j in range(sm.rank):
                        entries[ro + i][co + j] = blk.entries[i][j]
            co += sm.rank
        ro += tm.rank
    return ModMap(src, tgt, delta, entries, check=False)


# -- minimal generators of degreewise-presented submodules ------------------


def minimal_generators(ambient: FreeModule, piece_fn, window, on_new=None):
    """Minimal generators of a graded submodule of ``ambient`` given by
    degreewise bases.

    piece_fn(d) must return a k-basis (list of ambient elements) of the
    submodule's degree-d piece.  Scanning low to high over the window,
    returns [(degree, element)] whose classes generate the submodule.
    Raises WindowNotStabilized if generators appear in the top two degrees.
    """
    d0, d1 = window
    if ambient.graded_dim(d0 - 1) or ambient.graded_dim(d0 - 2):
        lo = ambient.min_gen_degree()
        if d0 > lo:
            raise ValidationError("window starts above ambient minimal degree")
    gens = []
    nv = ambient.ring.nvars
    xs = [ambient.ring.var(i) for i in range(nv)]
    for d in range(d0, d1 + 1):
        if ambient.graded_dim(d) == 0:
            continue
        cur = piece_fn(d)
        if not cur and ambient.graded_dim(d - 2) == 0:
            continue
        ech = Echelon(len(ambient.piece_basis(d)))
        if d - 2 >= d0 and ambient.graded_dim(d - 2):
            # R_+ is generated in degree 2, so R_+ M below d meets degree d
            # exactly in R_2 * M_{d-2}
            for v in piece_fn(d - 2):
                for xi in xs:
                    w = ambient.reduce_elem(tuple(p * xi for p in v))
                    ech.add(ambient.coords(w, d))
        new_here = []
        for v in cur:
            if ech.add(ambient.coords(v, d)):
                new_here.append(v)
        if new_here and d >= d1 - 1:
            raise WindowNotStabilized(
                "new generators at degree %d inside the top two degrees of [%d, %d]"
                % (d, d0, d1))
        for v in new_here:
            gens.append((d, v))
            if on_new:
                on_new(d, v)
    return gens


def submodule_piece_from_spans(ambient: FreeModule, span_elems, d):
    """Deduplicate a spanning list into a basis of the degree-d piece."""
    ech = Echelon(len(ambient.piece_basis(d)))
    out = []
    for v in span_elems:
        if ech.add(ambient.coords(v, d)):
            out.append(v)
    return out


def express_in_generators(ambient: FreeModule, gens, target, d):
    """Write a degree-d element as an R-combination of generators.

    gens is a list of (degree, element).  Returns the list of polynomial
    coefficients, or None when the element is not in the span.
    """
    ring = ambient.ring
    cols = []
    colinfo = []
    for gi, (gd, g) in enumerate(gens):
        pd = d - gd
        if pd < 0 or pd % 2:
            continue
        for mono in ring.monomials(pd // 2):
            w = ambient.reduce_elem(tuple(ring.monomial(mono, 1) * p for p in g))
            cols.append(ambient.coords(w, d))
            colinfo.append((gi, mono))
    tgt = ambient.coords(target, d)
    n = len(cols)
    rows = [[cols[j][i] for j in range(n)] for i in range(len(tgt))]
    x = solve(rows, n, tgt, ring.field)
    if x is None:
        return None
    coeffs = [ring.zero() for _ in gens]
    for val, (gi, mono) in zip(x, colinfo):
        if val:
            coeffs[gi] = coeffs[gi] + ring.monomial(mono, val)
    return coeffs


def free_cover(ambient: FreeModule, gens, alpha=None):
    """Free module on the generators plus the covering map into ambient."""
    ring = ambient.ring
    cover = FreeModule(ring, tuple(-d for d, _ in gens), alpha)
    z = ring.zero()
    entries = [[z] * len(gens) for _ in range(ambient.rank)]
    for k, (_, g) in enumerate(gens):
        for i in range(ambient.rank):
            entries[i][k] = g[i]
    return cover, ModMap(cover, ambient, 0, entries, check=False)


def certify_free(ambient: FreeModule, gens, piece_fn, window) -> bool:
    """Degreewise check that the free module on gens maps isomorphically
    onto the submodule: dims of the cover match the piece dims across the
    window (spanning holds by construction of minimal generators)."""
    cover = FreeModule(ambient.ring, tuple(-d for d, _ in gens), ambient.alpha)
    d0, d1 = window
    for d in range(d0, d1 + 1):
        if ambient.graded_dim(d) == 0:
            if cover.graded_dim(d):
                return False
            continue
        if cover.graded_dim(d) != len(piece_fn(d)):
            return False
    return True


class BlockModule:
    """Concatenation of graded modules with per-block annihilators.

    Duck-types the part of the FreeModule surface needed by degreewise
    scans (piece bases, coordinates, slotwise reduction); used as the
    ambient for images and kernels that mix edge modules with different
    labels.
    """

    def __init__(self, blocks):
        self.blocks = [b for b in blocks]
        if not self.blocks:
            raise ValidationError("empty block module")
        self.ring = self.blocks[0].ring
        self.alpha = None
        self._slot_block = []
        self.offsets = []
        off = 0
        for bi, b in enumerate(self.blocks):
            self.offsets.append(off)
            self._slot_block.extend([bi] * b.rank)
            off += b.rank
        self.rank = off
        self.shifts = tuple(s for b in self.blocks for s in b.shifts)
        self._piece_cache = {}

    def graded_dim(self, d):
        return sum(b.graded_dim(d) for b in self.blocks)

    def min_gen_degree(self):
        return min((b.min_gen_degree() for b in self.blocks if b.rank), default=0)

    def max_gen_degree(self):
        return max((b.max_gen_degree() for b in self.blocks if b.rank), default=0)

    def piece_basis(self, d):
        if d not in self._piece_cache:
            out = []
            for bi, b in enumerate(self.blocks):
                off = self.offsets[bi]
                for (k, mono) in b.piece_basis(d):
                    out.append((off + k, mono))
            self._piece_cache[d] = tuple(out)
        return self._piece_cache[d]

    def reduce_elem(self, elem):
        return tuple(self.blocks[self._slot_block[i]].reduce(p)
                     for i, p in enumerate(elem))

    def zero_elem(self):
        z = self.ring.zero()
        return tuple(z for _ in range(self.rank))

    def gen_elem(self, k):
        out = [self.ring.zero()] * self.rank
        out[k] = self.ring.one()
        return tuple(out)

    def coords(self, elem, d):
        zero = self.ring.field.zero
        return [elem[k].terms.get(mono, zero) for (k, mono) in self.piece_basis(d)]

    def from_coords(self, coords, d):
        comps = [dict() for _ in range(self.rank)]
        for (k, mono), c in zip(self.piece_basis(d), coords):
            if c:
                comps[k][mono] = c
        return tuple(Poly(self.ring, t) for t in comps)


class RowStack:
    """Vertical stack of ModMaps out of a shared source concatenation.

    rows: list of (tgt FreeModule, {source block index: (ModMap, sign)}).
    Computes degreewise kernels as elements of the source concatenation.
    """

    def __init__(self, src_mods, rows):
        self.src = BlockModule(src_mods) if len(src_mods) != 1 else src_mods[0]
        self.src_mods = list(src_mods)
        self.rows = rows

    def kernel_in_degree(self, d):
        from .linalg import kernel_basis
        src_basis = self.src.piece_basis(d)
        n = len(src_basis)
        if n == 0:
            return []
        col_dims = [len(m.piece_basis(d)) for m in self.src_mods]
        col_offsets = []
        off = 0
        for cd in col_dims:
            col_offsets.append(off)
            off += cd
        zero = self.src.ring.field.zero
        big_rows = []
        for tgt, colmap in self.rows:
            nr = len(tgt.piece_basis(d))
            if nr == 0:
                continue
            block_rows = [[zero] * n for _ in range(nr)]
            for bi, (mm, sign) in colmap.items():
                sub = mm.degree_matrix(d)
                for i in range(nr):
                    ri = block_rows[i]
                    si = sub[i]
                    o = col_offsets[bi]
                    for j in range(col_dims[bi]):
                        c = si[j]
                        if c:
                            ri[o + j] = c if sign > 0 else -c
            big_rows.extend(block_rows)
        vecs = kernel_basis(big_rows, n, self.src.ring.field)
        return [self.src.from_coords(v, d) for v in vecs]

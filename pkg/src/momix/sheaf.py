"""Sheaves on moment graphs: sections, the naive pushforward/restriction/
corestriction functors, sheaf Hom spaces, and the Braden-MacPherson axiom
verifier.

Sheaf data always covers the full graph; zero modules mark the complement
of the support.  Functors that are really about a sub-moment graph take
the vertex subset as an argument, and Hom systems can be solved relative
to such a domain (constraints only on internal edges).
"""

from __future__ import annotations

from .errors import (InvariantError, NotClosed, NotFreeInWindow, ValidationError,
                     WindowNotStabilized)
from .gradedmod import (BlockModule, FreeModule, ModMap, RowStack, block_map,
                        certify_free, direct_sum, express_in_generators, free_cover,
                        minimal_generators, submodule_piece_from_spans)
from .graph import GraphMorphism, MomentGraph
from .poly import Poly
from .linalg import Echelon, kernel_basis, rank, same_span, solve


class Sheaf:
    """Per-vertex graded free modules, per-edge label-torsion modules,
    and structure maps rho."""

    def __init__(self, graph: MomentGraph, stalks, edge_mods, rho, check=False):
        self.graph = graph
        self.stalks = tuple(stalks)
        self.edge_mods = tuple(edge_mods)
        self.rho = dict(rho)
        if len(self.stalks) != graph.nverts or len(self.edge_mods) != graph.nedges:
            raise ValidationError("sheaf data shape mismatch")
        for k, m in enumerate(self.edge_mods):
            if m.rank and m.alpha != graph.labels[k]:
                raise ValidationError("edge module %d not killed by its label" % k)
        for k, (u, v) in enumerate(graph.edges):
            for w in (u, v):
                if (w, k) not in self.rho:
                    self.rho[(w, k)] = ModMap.zero(self.stalks[w], self.edge_mods[k])
        if check:
            for (w, k), m in self.rho.items():
                if m.src != self.stalks[w] or m.tgt != self.edge_mods[k] or m.delta != 0:
                    raise ValidationError("rho map at (%d,%d) malformed" % (w, k))
                m.check_homogeneous()

    @property
    def ring(self):
        return self.graph.ring

    def support(self):
        return tuple(v for v in range(self.graph.nverts) if self.stalks[v].rank)

    def is_zero(self):
        return not any(m.rank for m in self.stalks) and not any(m.rank for m in self.edge_mods)

    def twist(self, n: int) -> "Sheaf":
        if n == 0:
            return self
        return Sheaf(self.graph,
                     [m.twist(n) for m in self.stalks],
                     [m.twist(n) for m in self.edge_mods],
                     {k: m.twist(n) for k, m in self.rho.items()})

    def __repr__(self):
        bits = ["%s:%s" % (self.graph.ids[v], list(self.stalks[v].shifts))
                for v in self.support()]
        return "Sheaf(%s)" % ", ".join(bits)


def zero_sheaf(graph: MomentGraph) -> Sheaf:
    stalks = [FreeModule(graph.ring, ()) for _ in range(graph.nverts)]
    edges = [FreeModule(graph.ring, ()) for _ in range(graph.nedges)]
    return Sheaf(graph, stalks, edges, {})


def skyscraper(graph: MomentGraph, v: int, shifts) -> Sheaf:
    """Free module at a single vertex, zero elsewhere."""
    stalks = [FreeModule(graph.ring, shifts if w == v else ())
              for w in range(graph.nverts)]
    edges = [FreeModule(graph.ring, ()) for _ in range(graph.nedges)]
    return Sheaf(graph, stalks, edges, {})


class SheafMorphism:
    """Degree-delta morphism of sheaves: commuting vertex/edge components."""

    def __init__(self, src: Sheaf, tgt: Sheaf, delta: int, vmaps, emaps, check=True):
        self.src = src
        self.tgt = tgt
        self.delta = delta
        self.vmaps = list(vmaps)
        self.emaps = list(emaps)
        if check:
            self.verify()

    def verify(self):
        g = self.src.graph
        if g is not self.tgt.graph:
            raise ValidationError("morphism between sheaves on different graphs")
        for k, (u, w) in enumerate(g.edges):
            for v in (u, w):
                lhs = self.emaps[k].compose(self.src.rho[(v, k)])
                rhs = self.tgt.rho[(v, k)].compose(self.vmaps[v])
                if not lhs.add(rhs.neg()).is_zero():
                    raise InvariantError(
                        "morphism square fails at vertex %s, edge %s-%s"
                        % (g.ids[v], g.ids[u], g.ids[w]))

    @staticmethod
    def zero(src: Sheaf, tgt: Sheaf, delta=0):
        g = src.graph
        return SheafMorphism(
            src, tgt, delta,
            [ModMap.zero(src.stalks[v], tgt.stalks[v], delta) for v in range(g.nverts)],
            [ModMap.zero(src.edge_mods[k], tgt.edge_mods[k], delta) for k in range(g.nedges)],
            check=False)

    @staticmethod
    def identity(F: Sheaf):
        return SheafMorphism(F, F, 0,
                             [ModMap.identity(m) for m in F.stalks],
                             [ModMap.identity(m) for m in F.edge_mods], check=False)

    def is_zero(self):
        return all(m.is_zero() for m in self.vmaps) and all(m.is_zero() for m in self.emaps)

    def compose(self, other: "SheafMorphism") -> "SheafMorphism":
        """self ∘ other."""
        return SheafMorphism(other.src, self.tgt, self.delta + other.delta,
                             [a.compose(b) for a, b in zip(self.vmaps, other.vmaps)],
                             [a.compose(b) for a, b in zip(self.emaps, other.emaps)],
                             check=False)

    def add(self, other):
        return SheafMorphism(self.src, self.tgt, self.delta,
                             [a.add(b) for a, b in zip(self.vmaps, other.vmaps)],
                             [a.add(b) for a, b in zip(self.emaps, other.emaps)],
                             check=False)

    def neg(self):
        return SheafMorphism(self.src, self.tgt, self.delta,
                             [m.neg() for m in self.vmaps],
                             [m.neg() for m in self.emaps], check=False)

    def scale(self, c):
        return SheafMorphism(self.src, self.tgt, self.delta,
                             [m.scale(c) for m in self.vmaps],
                             [m.scale(c) for m in self.emaps], check=False)

    def scale_poly(self, q):
        return SheafMorphism(self.src, self.tgt, self.delta + (q.internal_degree() or 0),
                             [m.scale_poly(q) for m in self.vmaps],
                             [m.scale_poly(q) for m in self.emaps], check=False)

    def twist(self, n: int):
        return SheafMorphism(self.src.twist(n), self.tgt.twist(n), self.delta,
                             [m.twist(n) for m in self.vmaps],
                             [m.twist(n) for m in self.emaps], check=False)


def sheaf_direct_sum(sheaves):
    """Direct sum plus injection and projection morphisms."""
    sheaves = list(sheaves)
    g = sheaves[0].graph
    stalks = [direct_sum([F.stalks[v] for F in sheaves]) for v in range(g.nverts)]
    edges = [direct_sum([F.edge_mods[k] for F in sheaves]) for k in range(g.nedges)]
    rho = {}
    for k, (u, w) in enumerate(g.edges):
        for v in (u, w):
            rho[(v, k)] = block_map([F.stalks[v] for F in sheaves],
                                    [F.edge_mods[k] for F in sheaves],
                                    [[F.rho[(v, k)] if i == j else None
                                      for j, _ in enumerate(sheaves)]
                                     for i, F in enumerate(sheaves)])
            rho[(v, k)] = ModMap(stalks[v], edges[k], 0, rho[(v, k)].entries, check=False)
    total = Sheaf(g, stalks, edges, rho)
    injs, projs = [], []
    for i, F in enumerate(sheaves):
        vmaps_i, vmaps_p = [], []
        for v in range(g.nverts):
            before = sum(S.stalks[v].rank for S in sheaves[:i])
            vmaps_i.append(_slice_in(F.stalks[v], stalks[v], before))
            vmaps_p.append(_slice_out(stalks[v], F.stalks[v], before))
        emaps_i, emaps_p = [], []
        for k in range(g.nedges):
            before = sum(S.edge_mods[k].rank for S in sheaves[:i])
            emaps_i.append(_slice_in(F.edge_mods[k], edges[k], before))
            emaps_p.append(_slice_out(edges[k], F.edge_mods[k], before))
        injs.append(SheafMorphism(F, total, 0, vmaps_i, emaps_i, check=False))
        projs.append(SheafMorphism(total, F, 0, vmaps_p, emaps_p, check=False))
    return total, injs, projs


def _slice_in(small, big, offset):
    ring = small.ring
    z, one = ring.zero(), ring.one()
    entries = [[z] * small.rank for _ in range(big.rank)]
    for j in range(small.rank):
        entries[offset + j][j] = one
    return ModMap(small, big, 0, entries, check=False)


def _slice_out(big, small, offset):
    ring = small.ring
    z, one = ring.zero(), ring.one()
    entries = [[z] * big.rank for _ in range(small.rank)]
    for i in range(small.rank):
        entries[i][offset + i] = one
    return ModMap(big, small, 0, entries, check=False)


# -- sections ----------------------------------------------------------------


class SectionSpace:
    """Degreewise space of sections of F over a vertex subset."""

    def __init__(self, F: Sheaf, subset):
        self.F = F
        self.verts = sorted(subset)
        g = F.graph
        self.offsets = {}
        off = 0
        self.vslot = {}
        for n, v in enumerate(self.verts):
            self.offsets[v] = off
            self.vslot[v] = n
            off += F.stalks[v].rank
        if self.verts:
            mods = [F.stalks[v] for v in self.verts]
            self.int_edges = [k for k in g.internal_edges(self.verts)
                              if F.edge_mods[k].rank]
            rows = []
            for k in self.int_edges:
                u, w = g.edges[k]
                rows.append((F.edge_mods[k],
                             {self.vslot[u]: (F.rho[(u, k)], 1),
                              self.vslot[w]: (F.rho[(w, k)], -1)}))
            self.stack = RowStack(mods, rows)
            self.ambient = self.stack.src
        else:
            self.int_edges = []
            self.stack = None
            self.ambient = FreeModule(F.ring, ())
        self._pieces = {}

    def piece(self, d: int):
        if d not in self._pieces:
            if not self.verts or self.ambient.graded_dim(d) == 0:
                self._pieces[d] = []
            elif not self.int_edges:
                self._pieces[d] = [self.ambient.from_coords(c, d) for c in
                                   _std_coords(self.ambient, d)]
            else:
                self._pieces[d] = self.stack.kernel_in_degree(d)
        return self._pieces[d]

    def dim(self, d: int) -> int:
        return len(self.piece(d))

    def project(self, elem, v: int):
        off = self.offsets[v]
        return tuple(elem[off + j] for j in range(self.F.stalks[v].rank))


def _std_coords(module, d):
    n = len(module.piece_basis(d))
    f = module.ring.field
    out = []
    for i in range(n):
        c = [f.zero] * n
        c[i] = f.one
        out.append(c)
    return out


def sections(F: Sheaf, subset, degrees):
    """Bases of Γ(subset, F) for each degree in the iterable."""
    sp = SectionSpace(F, subset)
    return {d: sp.piece(d) for d in degrees}


# -- naive functors -----------------------------------------------------------


def restrict(F: Sheaf, subset) -> Sheaf:
    """Data of F on the full sub-moment graph of the subset, zero outside.

    This is j^* for open subsets, the naive i^[*] for closed ones, and
    h-restriction in general (all read through the zero-extension picture).
    """
    g = F.graph
    s = set(subset)
    internal = set(g.internal_edges(s))
    stalks = [F.stalks[v] if v in s else FreeModule(g.ring, ())
              for v in range(g.nverts)]
    edges = [F.edge_mods[k] if k in internal else FreeModule(g.ring, ())
             for k in range(g.nedges)]
    rho = {}
    for k, (u, w) in enumerate(g.edges):
        if k in internal:
            rho[(u, k)] = F.rho[(u, k)]
            rho[(w, k)] = F.rho[(w, k)]
    return Sheaf(g, stalks, edges, rho)


def extend_by_zero(F: Sheaf, closed_subset) -> Sheaf:
    """i_* = i_! for the closed inclusion: for zero-extended data this is
    the identity on sheaves already supported there."""
    F.graph.require_closed(closed_subset)
    s = set(closed_subset)
    for v in range(F.graph.nverts):
        if v not in s and F.stalks[v].rank:
            raise ValidationError("sheaf not supported on the closed subset")
    return restrict(F, closed_subset)


def restriction_unit(F: Sheaf, closed_subset) -> SheafMorphism:
    """epsilon: F -> i_* i^[*] F (identity components over the subset)."""
    F.graph.require_closed(closed_subset)
    tgt = restrict(F, closed_subset)
    g = F.graph
    s = set(closed_subset)
    internal = set(g.internal_edges(s))
    vmaps = [ModMap.identity(F.stalks[v]).retarget(F.stalks[v], tgt.stalks[v])
             if v in s else ModMap.zero(F.stalks[v], tgt.stalks[v])
             for v in range(g.nverts)]
    emaps = [ModMap.identity(F.edge_mods[k]).retarget(F.edge_mods[k], tgt.edge_mods[k])
             if k in internal else ModMap.zero(F.edge_mods[k], tgt.edge_mods[k])
             for k in range(g.nedges)]
    return SheafMorphism(F, tgt, 0, vmaps, emaps, check=False)


class Corestriction:
    """i^[!] to a closed subset, materialized with graded-free costalks."""

    def __init__(self, sheaf: Sheaf, counit: SheafMorphism, gens):
        self.sheaf = sheaf
        self.counit = counit       # i_* i^[!] F -> F
        self.gens = gens           # per vertex: list of (degree, stalk element)


def costalk_generators(F: Sheaf, v: int, off_edges, window=None, retries=2):
    """Minimal generators of {m in F^v : rho_{v,e}(m) = 0 for e in off_edges},
    with graded-freeness certification.  Raises NotFreeInWindow."""
    g = F.graph
    stalk = F.stalks[v]
    if stalk.rank == 0:
        return []
    live = [k for k in off_edges if F.edge_mods[k].rank]
    if not live:
        return [(-n, stalk.gen_elem(i)) for i, n in enumerate(stalk.shifts)]
    stacked = RowStack([stalk], [(F.edge_mods[k], {0: (F.rho[(v, k)], 1)})
                                 for k in live])
    cache = {}

    def piece(d):
        if d not in cache:
            cache[d] = stacked.kernel_in_degree(d)
        return cache[d]

    lo = stalk.min_gen_degree()
    hi = window[1] if window else stalk.max_gen_degree() + 2 * len(live) + 4
    for attempt in range(retries + 1):
        try:
            gens = minimal_generators(stalk, piece, (lo, hi))
            break
        except WindowNotStabilized:
            if attempt == retries:
                raise
            hi += 4
    if not certify_free(stalk, gens, piece, (lo, hi)):
        raise NotFreeInWindow(
            "costalk at %s is not graded free on window [%d, %d]"
            % (g.ids[v], lo, hi), witness=(F, v))
    return gens


def corestrict(F: Sheaf, closed_subset, window=None) -> Corestriction:
    """i^[!] for a closed subset: kernel stalks along edges leaving the
    subset upward, presented by certified free covers; ships the counit."""
    g = F.graph
    g.require_closed(closed_subset)
    s = set(closed_subset)
    internal = set(g.internal_edges(s))
    gens = {}
    covers = {}
    incls = {}
    for v in sorted(s):
        off = [k for k in g.up_edges(v) if k not in internal]
        gv = costalk_generators(F, v, off, window)
        gens[v] = gv
        cover, incl = free_cover(F.stalks[v], gv)
        covers[v] = cover
        incls[v] = incl
    stalks = [covers.get(v, FreeModule(g.ring, ())) for v in range(g.nverts)]
    edges = [F.edge_mods[k] if k in internal else FreeModule(g.ring, ())
             for k in range(g.nedges)]
    rho = {}
    for k in internal:
        u, w = g.edges[k]
        for v in (u, w):
            rho[(v, k)] = F.rho[(v, k)].compose(incls[v])
    out = Sheaf(g, stalks, edges, rho)
    vmaps = [incls[v] if v in s else ModMap.zero(stalks[v], F.stalks[v])
             for v in range(g.nverts)]
    emaps = [ModMap.identity(F.edge_mods[k]).retarget(edges[k], F.edge_mods[k])
             if k in internal else ModMap.zero(edges[k], F.edge_mods[k])
             for k in range(g.nedges)]
    counit = SheafMorphism(out, F, 0, vmaps, emaps, check=False)
    return Corestriction(out, counit, gens)


def pullback(f: GraphMorphism, G: Sheaf) -> Sheaf:
    """Pullback along a morphism of moment graphs: stalks copy, collapsed
    edges become label-quotients of the common stalk."""
    if G.graph is not f.tgt:
        raise ValidationError("sheaf does not live on the morphism target")
    gX = f.src
    stalks = [G.stalks[f.vmap[v]] for v in range(gX.nverts)]
    edges = []
    rho = {}
    for k, (u, w) in enumerate(gX.edges):
        fu, fw = f.vmap[u], f.vmap[w]
        if fu == fw:
            stalk = G.stalks[fu]
            if stalk.rank:
                em = FreeModule(gX.ring, stalk.shifts, gX.labels[k])
                q = ModMap.identity(stalk).retarget(stalk, em)
            else:
                em = FreeModule(gX.ring, ())
                q = ModMap.zero(stalk, em)
            edges.append(em)
            rho[(u, k)] = q
            rho[(w, k)] = q
        else:
            ek = f.tgt.edge_key(fu, fw)
            edges.append(G.edge_mods[ek])
            rho[(u, k)] = G.rho[(fu, ek)]
            rho[(w, k)] = G.rho[(fw, ek)]
    return Sheaf(gX, stalks, edges, rho)


def pullback_morphism(f: GraphMorphism, phi: SheafMorphism) -> SheafMorphism:
    src = pullback(f, phi.src)
    tgt = pullback(f, phi.tgt)
    gX = f.src
    vmaps = [phi.vmaps[f.vmap[v]].retarget(src.stalks[v], tgt.stalks[v])
             for v in range(gX.nverts)]
    emaps = []
    for k, (u, w) in enumerate(gX.edges):
        fu, fw = f.vmap[u], f.vmap[w]
        if fu == fw:
            m = phi.vmaps[fu]
            emaps.append(ModMap(src.edge_mods[k], tgt.edge_mods[k], phi.delta,
                                m.entries, check=False))
        else:
            ek = f.tgt.edge_key(fu, fw)
            emaps.append(phi.emaps[ek].retarget(src.edge_mods[k], tgt.edge_mods[k]))
    return SheafMorphism(src, tgt, phi.delta, vmaps, emaps, check=False)


# -- Hom spaces ---------------------------------------------------------------


class MorphismLayout:
    """Unknown-coefficient layout for morphisms E -> F of a fixed shift."""

    def __init__(self, E: Sheaf, F: Sheaf, delta: int, domain=None):
        g = E.graph
        self.E, self.F, self.delta = E, F, delta
        self.domain = sorted(domain) if domain is not None else list(range(g.nverts))
        dset = set(self.domain)
        self.int_edges = [k for k in g.internal_edges(dset)]
        self.slots = []           # ("v"|"e", obj_index, i, j, mono)
        for v in self.domain:
            sm, tm = E.stalks[v], F.stalks[v]
            for i in range(tm.rank):
                for j in range(sm.rank):
                    deg = tm.shifts[i] - sm.shifts[j] + delta
                    if deg < 0 or deg % 2:
                        continue
                    for mono in g.ring.monomials(deg // 2):
                        self.slots.append(("v", v, i, j, mono))
        for k in self.int_edges:
            sm, tm = E.edge_mods[k], F.edge_mods[k]
            for i in range(tm.rank):
                for j in range(sm.rank):
                    deg = tm.shifts[i] - sm.shifts[j] + delta
                    if deg < 0 or deg % 2:
                        continue
                    for mono in g.ring.monomials(deg // 2, tm._lead):
                        self.slots.append(("e", k, i, j, mono))
        self.index = {s: n for n, s in enumerate(self.slots)}

    def nslots(self):
        return len(self.slots)

    def to_morphism(self, coeffs) -> SheafMorphism:
        E, F, g = self.E, self.F, self.E.graph
        ring = g.ring
        vpolys = {v: [[dict() for _ in range(E.stalks[v].rank)]
                      for _ in range(F.stalks[v].rank)] for v in range(g.nverts)}
        epolys = {k: [[dict() for _ in range(E.edge_mods[k].rank)]
                      for _ in range(F.edge_mods[k].rank)] for k in range(g.nedges)}
        for (kind, obj, i, j, mono), c in zip(self.slots, coeffs):
            if not c:
                continue
            if kind == "v":
                vpolys[obj][i][j][mono] = c
            else:
                epolys[obj][i][j][mono] = c
        vmaps = [ModMap(E.stalks[v], F.stalks[v], self.delta,
                        [[Poly(ring, t) for t in row] for row in vpolys[v]], check=False)
                 for v in range(g.nverts)]
        emaps = [ModMap(E.edge_mods[k], F.edge_mods[k], self.delta,
                        [[Poly(ring, t) for t in row] for row in epolys[k]], check=False)
                 for k in range(g.nedges)]
        return SheafMorphism(E, F, self.delta, vmaps, emaps, check=False)

    def coords(self, phi: SheafMorphism):
        out = []
        for (kind, obj, i, j, mono) in self.slots:
            p = (phi.vmaps[obj] if kind == "v" else phi.emaps[obj]).entries[i][j]
            out.append(p.terms.get(mono, self.E.ring.field.zero))
        return out

    def equations(self):
        """Rows of the commuting-square linear system over the slots."""
        E, F = self.E, self.F
        g = E.graph
        rows = []
        zero = g.ring.field.zero
        for k in self.int_edges:
            u, w = g.edges[k]
            em = F.edge_mods[k]
            for v in (u, w):
                sv = E.stalks[v]
                rE = E.rho[(v, k)]
                rF = F.rho[(v, k)]
                for i in range(em.rank):
                    for j in range(sv.rank):
                        deg = em.shifts[i] - sv.shifts[j] + self.delta
                        if deg < 0 or deg % 2:
                            continue
                        contrib = {}
                        # rho^F composed with phi^v
                        for kk in range(F.stalks[v].rank):
                            base = rF.entries[i][kk]
                            if not base:
                                continue
                            dphi = F.stalks[v].shifts[kk] - sv.shifts[j] + self.delta
                            if dphi < 0 or dphi % 2:
                                continue
                            for mono in g.ring.monomials(dphi // 2):
                                prod = em.reduce(base * Poly_mono(g.ring, mono))
                                slot = ("v", v, kk, j, mono)
                                for e2, c2 in prod.terms.items():
                                    key = (slot, e2)
                                    contrib[key] = contrib.get(key, zero) + c2
                        # minus phi^e composed with rho^E
                        for kk in range(E.edge_mods[k].rank):
                            base = rE.entries[kk][j]
                            if not base:
                                continue
                            dphi = em.shifts[i] - E.edge_mods[k].shifts[kk] + self.delta
                            if dphi < 0 or dphi % 2:
                                continue
                            for mono in g.ring.monomials(dphi // 2, em._lead):
                                prod = em.reduce(base * Poly_mono(g.ring, mono))
                                slot = ("e", k, i, kk, mono)
                                for e2, c2 in prod.terms.items():
                                    key = (slot, e2)
                                    contrib[key] = contrib.get(key, zero) - c2
                        for e2 in sorted({ee for (_, ee) in contrib}, reverse=True):
                            row = [zero] * len(self.slots)
                            any_nz = False
                            for (slot, ee), c in contrib.items():
                                if ee == e2 and c:
                                    row[self.index[slot]] = c
                                    any_nz = True
                            if any_nz:
                                rows.append(row)
        return rows


def Poly_mono(ring, mono):
    return Poly(ring, {mono: ring.field.one})


def hom_basis(E: Sheaf, F: Sheaf, delta: int, domain=None):
    """Basis of degree-delta sheaf morphisms E -> F over the domain."""
    layout = MorphismLayout(E, F, delta, domain)
    rows = layout.equations()
    vecs = kernel_basis(rows, layout.nslots(), E.ring.field)
    return [layout.to_morphism(v) for v in vecs]


def hom_dim(E: Sheaf, F: Sheaf, delta: int, domain=None) -> int:
    layout = MorphismLayout(E, F, delta, domain)
    rows = layout.equations()
    return layout.nslots() - rank(rows, layout.nslots())


# -- BMP verification -----------------------------------------------------------


def verify_bmp(F: Sheaf, domain=None, window=None):
    """Check (BMP1), (BMP2) and im(u_x) = im(d_x) degreewise.

    Returns a report dict: {"ok": bool, "vertices": {id: bool},
    "edges": {(u,w): bool}, "failures": [...]}.
    """
    g = F.graph
    dom = sorted(domain) if domain is not None else list(range(g.nverts))
    dset = set(dom)
    internal = g.internal_edges(dset)
    if window is None:
        gens_lo = min((F.stalks[v].min_gen_degree() for v in dom if F.stalks[v].rank),
                      default=0)
        gens_hi = max((F.stalks[v].max_gen_degree() for v in dom if F.stalks[v].rank),
                      default=0)
        # both images are generated in stalk-generator degrees, so agreement
        # slightly above them is conclusive for equality of the submodules
        window = (gens_lo, gens_hi + 4)
    failures = []
    edge_ok = {}
    for k in internal:
        u, w = g.edges[k]
        em = F.edge_mods[k]
        stalk = F.stalks[w]
        r = F.rho[(w, k)]
        ok = True
        if em.rank or stalk.rank:
            # surjectivity: cokernel is generated in the degrees of the
            # target generators, so vanishing there is conclusive
            for d in range(em.min_gen_degree(), em.max_gen_degree() + 1):
                tgt_dim = em.graded_dim(d)
                if tgt_dim == 0:
                    continue
                if rank(r.degree_matrix(d)) != tgt_dim:
                    ok = False
                    failures.append(("BMP2-surjective", g.ids[u], g.ids[w], d))
                    break
            # kernel equals alpha * F^w, degreewise over the window
            if ok:
                lab = g.labels[k]
                for d in range(window[0], window[1] + 1):
                    if stalk.graded_dim(d) == 0:
                        continue
                    ker = r.kernel_in_degree(d)
                    expect = stalk.graded_dim(d - 2)
                    if len(ker) != expect:
                        ok = False
                        failures.append(("BMP2-kernel", g.ids[u], g.ids[w], d))
                        break
                    kv = [stalk.coords(x, d) for x in ker]
                    av = []
                    for (j, mono) in stalk.piece_basis(d - 2):
                        x = stalk.gen_elem(j)
                        x = tuple(p * Poly_mono(g.ring, mono) * lab for p in x)
                        av.append(stalk.coords(x, d))
                    if not same_span(kv, av, len(stalk.piece_basis(d))):
                        ok = False
                        failures.append(("BMP2-kernel-span", g.ids[u], g.ids[w], d))
                        break
        edge_ok[(g.ids[u], g.ids[w])] = ok
    vert_ok = {}
    internal_set = set(internal)
    for v in dom:
        ok = True
        ups = [k for k in g.up_edges(v) if k in internal_set and F.edge_mods[k].rank]
        above = sorted(u for u in dset if g.lt(v, u))
        sec = SectionSpace(F, above)
        if not ups:
            vert_ok[g.ids[v]] = True
            continue
        amb = BlockModule([F.edge_mods[k] for k in ups])
        for d in range(window[0], window[1] + 1):
            ncols = len(amb.piece_basis(d))
            if ncols == 0:
                continue
            # image of u_v: project sections over {>v} to the up-edges
            im_u = []
            for m in sec.piece(d):
                vec = []
                for k in ups:
                    u_, w_ = g.edges[k]
                    other = w_ if u_ == v else u_
                    img = F.rho[(other, k)].apply(sec.project(m, other))
                    vec.extend(img)
                im_u.append(amb.coords(tuple(vec), d))
            # image of d_v
            im_d = []
            for c in _std_coords(F.stalks[v], d):
                x = F.stalks[v].from_coords(c, d)
                vec = []
                for k in ups:
                    vec.extend(F.rho[(v, k)].apply(x))
                im_d.append(amb.coords(tuple(vec), d))
            if not same_span(im_u, im_d, ncols):
                ok = False
                failures.append(("BMP34", g.ids[v], d))
                break
        vert_ok[g.ids[v]] = ok
    return {"ok": not failures, "vertices": vert_ok, "edges": edge_ok,
            "failures": failures, "window": window}


def check_V(F_family, domain=None):
    """Condition (V) for a family of sheaves: every single-stratum costalk
    admits a certified free cover.  Returns (ok, witnesses)."""
    witnesses = []
    for F in F_family:
        g = F.graph
        dom = sorted(domain) if domain is not None else list(range(g.nverts))
        for v in dom:
            try:
                costalk_generators(F, v, list(g.up_edges(v)))
            except NotFreeInWindow:
                witnesses.append((F, g.ids[v]))
    return not witnesses, witnesses


def extend_morphism(E2: Sheaf, F2: Sheaf, base: SheafMorphism, z: int, domain):
    """Extend a morphism across one added vertex.

    base is a valid morphism between the restrictions of E2, F2 away from
    z; solve for the vertex component at z and the components at z-incident
    internal edges.  Returns the extended SheafMorphism, or None when no
    extension exists.
    """
    g = E2.graph
    delta = base.delta
    dset = set(domain)
    ring = g.ring
    zero = ring.field.zero
    eqs_edges = [k for k in range(g.nedges)
                 if z in g.edges[k] and g.edges[k][0] in dset and g.edges[k][1] in dset]
    # unknown slots
    slots = []
    sm, tm = E2.stalks[z], F2.stalks[z]
    for i in range(tm.rank):
        for j in range(sm.rank):
            deg = tm.shifts[i] - sm.shifts[j] + delta
            if deg >= 0 and deg % 2 == 0:
                for mono in ring.monomials(deg // 2):
                    slots.append(("v", z, i, j, mono))
    for k in eqs_edges:
        sme, tme = E2.edge_mods[k], F2.edge_mods[k]
        for i in range(tme.rank):
            for j in range(sme.rank):
                deg = tme.shifts[i] - sme.shifts[j] + delta
                if deg >= 0 and deg % 2 == 0:
                    for mono in ring.monomials(deg // 2, tme._lead):
                        slots.append(("e", k, i, j, mono))
    index = {s: n for n, s in enumerate(slots)}
    rows, rhs = [], []
    for k in eqs_edges:
        u, w = g.edges[k]
        em = F2.edge_mods[k]
        for v in (u, w):
            sv = E2.stalks[v]
            rE, rF = E2.rho[(v, k)], F2.rho[(v, k)]
            for i in range(em.rank):
                for j in range(sv.rank):
                    contrib = {}
                    fixed = ring.zero()
                    if v == z:
                        for kk in range(F2.stalks[v].rank):
                            base_p = rF.entries[i][kk]
                            if not base_p:
                                continue
                            dphi = F2.stalks[v].shifts[kk] - sv.shifts[j] + delta
                            if dphi < 0 or dphi % 2:
                                continue
                            for mono in ring.monomials(dphi // 2):
                                prod = em.reduce(base_p * Poly_mono(ring, mono))
                                slot = ("v", v, kk, j, mono)
                                for e2, c2 in prod.terms.items():
                                    key = (slot, e2)
                                    contrib[key] = contrib.get(key, zero) + c2
                    else:
                        # fixed vertex component contributes constants
                        comp = em.reduce(sum((rF.entries[i][kk] * base.vmaps[v].entries[kk][j]
                                              for kk in range(F2.stalks[v].rank)
                                              if rF.entries[i][kk] and base.vmaps[v].entries[kk][j]),
                                             ring.zero()))
                        fixed = fixed + comp
                    for kk in range(E2.edge_mods[k].rank):
                        base_p = rE.entries[kk][j]
                        if not base_p:
                            continue
                        dphi = em.shifts[i] - E2.edge_mods[k].shifts[kk] + delta
                        if dphi < 0 or dphi % 2:
                            continue
                        for mono in ring.monomials(dphi // 2, em._lead):
                            prod = em.reduce(base_p * Poly_mono(ring, mono))
                            slot = ("e", k, i, kk, mono)
                            for e2, c2 in prod.terms.items():
                                key = (slot, e2)
                                contrib[key] = contrib.get(key, zero) - c2
                    monos_eq = sorted({ee for (_, ee) in contrib} | set(fixed.terms),
                                      reverse=True)
                    for e2 in monos_eq:
                        row = [zero] * len(slots)
                        for (slot, ee), c in contrib.items():
                            if ee == e2 and c:
                                row[index[slot]] = c
                        rows.append(row)
                        rhs.append(-(fixed.terms.get(e2, zero)))
    x = solve(rows, len(slots), rhs, ring.field)
    if x is None:
        return None
    vpolys = [[dict() for _ in range(sm.rank)] for _ in range(tm.rank)]
    epolys = {k: [[dict() for _ in range(E2.edge_mods[k].rank)]
                  for _ in range(F2.edge_mods[k].rank)] for k in eqs_edges}
    for (kind, obj, i, j, mono), c in zip(slots, x):
        if not c:
            continue
        if kind == "v":
            vpolys[i][j][mono] = c
        else:
            epolys[obj][i][j][mono] = c
    vmaps = []
    for v in range(g.nverts):
        if v == z:
            vmaps.append(ModMap(sm, tm, delta,
                                [[Poly(ring, t) for t in row] for row in vpolys],
                                check=False))
        else:
            vmaps.append(ModMap(E2.stalks[v], F2.stalks[v], delta,
                                base.vmaps[v].entries, check=False))
    emaps = []
    for k in range(g.nedges):
        if k in epolys:
            emaps.append(ModMap(E2.edge_mods[k], F2.edge_mods[k], delta,
                                [[Poly(ring, t) for t in row] for row in epolys[k]],
                                check=False))
        else:
            emaps.append(ModMap(E2.edge_mods[k], F2.edge_mods[k], delta,
                                base.emaps[k].entries, check=False))
    return SheafMorphism(E2, F2, delta, vmaps, emaps, check=False)


def hom_module_generators(E: Sheaf, F: Sheaf, window, domain=None):
    """Minimal R-module generators of the graded Hom, scanned over the
    window, with a degreewise freeness certificate.

    Returns (gens, free) where gens is a list of (shift, SheafMorphism)
    and free says whether the free module on the generators matches the
    Hom dimensions throughout the window.
    """
    lo, hi = window
    bases = {}
    layouts = {}
    for delta in range(lo, hi + 1):
        layouts[delta] = MorphismLayout(E, F, delta, domain)
        bases[delta] = hom_basis(E, F, delta, domain)
    ring = E.ring
    gens = []
    for delta in range(lo, hi + 1):
        cur = bases[delta]
        if not cur:
            continue
        layout = layouts[delta]
        ech = Echelon(layout.nslots())
        if delta - 2 >= lo:
            for phi in bases[delta - 2]:
                for i in range(ring.nvars):
                    ech.add(layout.coords(phi.scale_poly(ring.var(i))))
        new = [phi for phi in cur if ech.add(layout.coords(phi))]
        if new and delta >= hi - 1:
            raise WindowNotStabilized("Hom generators in the top two degrees")
        gens.extend((delta, phi) for phi in new)
    free = True
    for delta in range(lo, hi + 1):
        want = sum(ring.dim_piece(delta - gd) for gd, _ in gens)
        if want != len(bases[delta]):
            free = False
    return gens, free

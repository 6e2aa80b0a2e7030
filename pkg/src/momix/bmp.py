"""Bruhat moment graphs and the Braden-MacPherson construction.

The builder descends a linear extension of {<= top} from the top.  At each
vertex it assembles the sections over the strictly-greater part, pushes
them into the direct sum of the upward edge modules, and covers the image
minimally; the covering map is the new stalk's structure map.  Both the
classification normalization (top stalk R) and the perverse one (top stalk
R{d_top}) are supported through an explicit tag.

Also here: greedy top-down Krull-Schmidt splitting, the sections <-> sheaf
bridge (global sections with their two module structures, and localization
back to a sheaf), and the translation construction that tensors the
sections bimodule with R over the s-invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coxeter import CoxeterGroup, require_reflection_faithful
from .errors import (InvariantError, LiftAmbiguous, SplitFailure, ValidationError,
                     WindowNotStabilized)
from .gradedmod import (BlockModule, FreeModule, ModMap, block_map, certify_free,
                        direct_sum, express_in_generators, free_cover,
                        minimal_generators)
from .graph import GraphMorphism, MomentGraph
from .linalg import Echelon, solve
from .poly import Poly
from .sheaf import (SectionSpace, Sheaf, SheafMorphism, MorphismLayout, Poly_mono,
                    hom_basis, sheaf_direct_sum, verify_bmp, zero_sheaf)

PERVERSE = "perverse"
CLASSIFICATION = "classification"


# -- Bruhat graphs --------------------------------------------------------------


@dataclass
class BruhatGraph:
    """Moment graph of W (parabolic None) or W/W_s (parabolic = s)."""
    graph: MomentGraph
    group: CoxeterGroup
    elements: tuple            # vertex -> representative CoxeterElement
    others: tuple | None       # for cosets: the longer representative
    parabolic: int | None

    def vertex_of(self, w) -> int:
        for v, el in enumerate(self.elements):
            if el is w or (self.parabolic is not None and self.others[v] is w):
                return v
        raise ValidationError("element not a vertex of this graph")


def bruhat_graph(group: CoxeterGroup, parabolic: int | None = None) -> BruhatGraph:
    require_reflection_faithful(group)
    gens = group.system.gens
    if parabolic is None:
        els = sorted(group, key=lambda w: (w.length, w.word))
        ids = [w.word_str(gens) for w in els]
        dfun = [w.length for w in els]
        idx = {w.index: i for i, w in enumerate(els)}
        less = [(idx[x.index], idx[y.index]) for x in els for y in els
                if x is not y and group.bruhat_leq(x, y)]
        edges, labels = [], []
        seen = set()
        for t, _ in group.reflections():
            lab = group.reflection_label(t)
            for x in els:
                y = group.mul(t, x)
                key = frozenset((x.index, y.index))
                if key in seen:
                    continue
                seen.add(key)
                edges.append((idx[x.index], idx[y.index]))
                labels.append(lab)
        g = MomentGraph(group.realization.ring, ids, dfun, less, edges, labels)
        return BruhatGraph(g, group, tuple(els), None, None)
    s = parabolic
    cosets = group.coset_data(s)
    reps = [c["rep"] for c in cosets]
    others = [c["other"] for c in cosets]
    ids = [w.word_str(gens) for w in reps]
    dfun = [c["d"] for c in cosets]
    member = {}
    for i, c in enumerate(cosets):
        member[c["rep"].index] = i
        member[c["other"].index] = i
    less = [(i, j) for i, p in enumerate(reps) for j, q in enumerate(reps)
            if i != j and group.bruhat_leq(p, q)]
    edges, labels = [], []
    seen = {}
    for t, _ in group.reflections():
        lab = group.reflection_label(t)
        for i, p in enumerate(reps):
            j = member[group.mul(t, p).index]
            if i == j:
                continue
            key = frozenset((i, j))
            if key in seen:
                if seen[key] != lab:
                    raise InvariantError("two reflections connect one coset pair")
                continue
            seen[key] = lab
            edges.append((i, j))
            labels.append(lab)
    g = MomentGraph(group.realization.ring, ids, dfun, less, edges, labels)
    return BruhatGraph(g, group, tuple(reps), tuple(others), s)


def quotient_morphism(bg: BruhatGraph, pg: BruhatGraph) -> GraphMorphism:
    """The projection W -> W/W_s as a morphism of moment graphs."""
    if pg.parabolic is None or bg.parabolic is not None:
        raise ValidationError("need the regular graph and a parabolic quotient")
    member = {}
    for i in range(pg.graph.nverts):
        member[pg.elements[i].index] = i
        member[pg.others[i].index] = i
    vmap = [member[w.index] for w in bg.elements]
    return GraphMorphism(bg.graph, pg.graph, vmap)


# -- the Braden-MacPherson construction --------------------------------------------


@dataclass
class BMPObject:
    sheaf: Sheaf
    graph: MomentGraph
    top: int
    normalization: str
    window: tuple
    report: dict | None = None

    def verify(self, domain=None):
        if self.report is None:
            self.report = verify_bmp(self.sheaf, domain=domain)
            if not self.report["ok"]:
                raise InvariantError("constructed sheaf fails the BMP axioms: %s"
                                     % self.report["failures"][:3])
        return self.report


def _descending_order(graph: MomentGraph, supp, reverse_ties=False):
    left = set(supp)
    order = []
    while left:
        ready = [v for v in left if not any(graph.lt(v, u) for u in left if u != v)]
        if reverse_ties:
            ready.sort(key=lambda v: (-graph.d[v], tuple(-ord(c) for c in graph.ids[v])))
        else:
            ready.sort(key=lambda v: (-graph.d[v], graph.ids[v]))
        order.append(ready[0])
        left.remove(ready[0])
    return order


def build_bmp(graph: MomentGraph, top: int, normalization: str = PERVERSE,
              window_hi: int | None = None, retries: int = 2,
              reverse_ties: bool = False) -> BMPObject:
    """The indecomposable canonical sheaf with the given top vertex.

    reverse_ties switches to another linear extension of the order (the
    output is independent of this choice up to isomorphism)."""
    if normalization not in (PERVERSE, CLASSIFICATION):
        raise ValidationError("unknown normalization %r" % normalization)
    ring = graph.ring
    supp = sorted(graph.down_set(top))
    order = _descending_order(graph, supp, reverse_ties)
    d_top = graph.d[top]
    stalks = {}
    edge_mods = {}
    rho = {}
    hi_default = 2 if normalization == PERVERSE else 2 * max(d_top, 1) + 2
    hi0 = window_hi if window_hi is not None else hi_default
    base_shift = d_top if normalization == PERVERSE else 0
    lo_seen = 0
    for v in order:
        if v == top:
            stalks[v] = FreeModule(ring, (base_shift,))
            lo_seen = -base_shift
            continue
        suppset = set(supp)
        ups = [k for k in graph.up_edges(v) if graph.edges[k][1] in suppset]
        for k in ups:
            y = graph.edges[k][1]
            upper = stalks[y]
            if upper.rank:
                em = FreeModule(ring, upper.shifts, graph.labels[k])
                edge_mods[k] = em
                rho[(y, k)] = ModMap.identity(upper).retarget(upper, em)
            else:
                edge_mods[k] = FreeModule(ring, ())
                rho[(y, k)] = ModMap.zero(upper, edge_mods[k])
        live = [k for k in ups if edge_mods[k].rank]
        if not live:
            stalks[v] = FreeModule(ring, ())
            continue
        above = sorted(u for u in supp if graph.lt(v, u))
        partial = _partial_sheaf(graph, stalks, edge_mods, rho)
        sec = SectionSpace(partial, above)
        amb = BlockModule([edge_mods[k] for k in live])
        cache = {}

        def piece(d, _sec=sec, _live=live, _amb=amb, _partial=partial, _cache=cache):
            if d not in _cache:
                out = []
                g = graph
                for m in _sec.piece(d):
                    vec = []
                    for k in _live:
                        other = g.edges[k][1]
                        vec.extend(_partial.rho[(other, k)].apply(_sec.project(m, other)))
                    out.append(tuple(vec))
                ech = Echelon(len(_amb.piece_basis(d)))
                _cache[d] = [x for x in out if ech.add(_amb.coords(x, d))]
            return _cache[d]

        lo = amb.min_gen_degree()
        lo_seen = min(lo_seen, lo)
        hi = max(hi0, lo + 2)
        for attempt in range(retries + 1):
            try:
                gens = minimal_generators(amb, piece, (lo, hi))
                break
            except WindowNotStabilized:
                if attempt == retries:
                    raise
                hi += 4
        cover = FreeModule(ring, tuple(-d for d, _ in gens))
        stalks[v] = cover
        off = 0
        for k in live:
            em = edge_mods[k]
            entries = [[gens[j][1][off + i] for j in range(len(gens))]
                       for i in range(em.rank)]
            rho[(v, k)] = ModMap(cover, em, 0, entries, check=False)
            off += em.rank
        for k in ups:
            if k not in live:
                rho[(v, k)] = ModMap.zero(cover, edge_mods[k])
    sheaf = _full_sheaf(graph, stalks, edge_mods, rho)
    return BMPObject(sheaf, graph, top, normalization, (lo_seen, hi0))


def _partial_sheaf(graph, stalks, edge_mods, rho):
    ring = graph.ring
    st = [stalks.get(v, FreeModule(ring, ())) for v in range(graph.nverts)]
    em = [edge_mods.get(k, FreeModule(ring, ())) for k in range(graph.nedges)]
    return Sheaf(graph, st, em, dict(rho))


def _full_sheaf(graph, stalks, edge_mods, rho):
    return _partial_sheaf(graph, stalks, edge_mods, rho)


def canonical_sheaf(graph: MomentGraph, top: int, normalization: str = PERVERSE) -> Sheaf:
    """Cached canonical indecomposable with the given top vertex."""
    cache = getattr(graph, "_canon_cache", None)
    if cache is None:
        cache = {}
        graph._canon_cache = cache
    key = (top, normalization)
    if key not in cache:
        cache[key] = build_bmp(graph, top, normalization).sheaf
    return cache[key]


def stalk_character(obj: Sheaf, v: int):
    """Multiset of generator degrees of the stalk at v (sorted)."""
    return tuple(sorted(-n for n in obj.stalks[v].shifts))


# -- Krull-Schmidt decomposition ---------------------------------------------------


@dataclass
class Summand:
    vertex: int
    twist: int
    sheaf: Sheaf               # canonical_sheaf(vertex).twist(twist)
    include: SheafMorphism     # into the decomposed sheaf
    project: SheafMorphism     # from the decomposed sheaf


@dataclass
class Decomposition:
    total: Sheaf
    summands: list

    def multiset(self, graph):
        return sorted((graph.ids[s.vertex], s.twist) for s in self.summands)


def top_scalar(phi: SheafMorphism, v: int):
    """Constant coefficient of the (0,0) entry at the top vertex."""
    ent = phi.vmaps[v].entries
    if not ent or not ent[0]:
        return phi.src.ring.field.zero
    nv = phi.src.ring.nvars
    return ent[0][0].terms.get((0,) * nv, phi.src.ring.field.zero)


def invert_endomorphism(B: Sheaf, phi: SheafMorphism, v: int) -> SheafMorphism:
    """Inverse of an endomorphism of an indecomposable canonical sheaf whose
    top-stalk scalar is nonzero (Krull-Schmidt locality)."""
    basis = hom_basis(B, B, 0)
    layout = MorphismLayout(B, B, 0)
    target = layout.coords(SheafMorphism.identity(B))
    cols = [layout.coords(phi.compose(e)) for e in basis]
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(len(target))]
    x = solve(rows, len(cols), target, B.ring.field)
    if x is None:
        raise SplitFailure("endomorphism with nonzero top scalar is not invertible")
    psi = SheafMorphism.zero(B, B, 0)
    for c, e in zip(x, basis):
        if c:
            psi = psi.add(e.scale(c))
    return psi


def _image_subsheaf(F: Sheaf, phi: SheafMorphism):
    """Materialize im(phi: F -> F) as a sheaf with chosen free bases, plus
    inclusion and projection morphisms (phi must be an idempotent)."""
    g = F.graph
    ring = g.ring
    stalk_gens = {}
    covers = {}
    for v in range(g.nverts):
        stalk = F.stalks[v]
        if stalk.rank == 0:
            covers[v] = FreeModule(ring, ())
            stalk_gens[v] = []
            continue
        mm = phi.vmaps[v]
        cache = {}

        def piece(d, _mm=mm, _stalk=stalk, _cache=cache):
            if d not in _cache:
                out = []
                ech = Echelon(len(_stalk.piece_basis(d)))
                for (j, mono) in _stalk.piece_basis(d):
                    x = _mm.apply(tuple(p * Poly_mono(ring, mono) for p in _stalk.gen_elem(j)))
                    if ech.add(_stalk.coords(x, d)):
                        out.append(x)
            # note: pieces are spans of images of the standard basis
                _cache[d] = out
            return _cache[d]

        lo = stalk.min_gen_degree()
        hi = stalk.max_gen_degree() + 2
        gens = minimal_generators(stalk, piece, (lo, hi))
        if not certify_free(stalk, gens, piece, (lo, hi)):
            raise SplitFailure("idempotent image is not free in the window")
        stalk_gens[v] = gens
        covers[v] = FreeModule(ring, tuple(-d for d, _ in gens))
    edge_mods = {}
    edge_gens = {}
    for k in range(g.nedges):
        em = F.edge_mods[k]
        if em.rank == 0:
            edge_mods[k] = FreeModule(ring, ())
            edge_gens[k] = []
            continue
        cache = {}

        def epiece(d, _k=k, _em=em, _phi=phi, _cache=cache):
            if d not in _cache:
                out = []
                ech = Echelon(len(_em.piece_basis(d)))
                for (j, mono) in _em.piece_basis(d):
                    x = _phi.emaps[_k].apply(
                        tuple(p * Poly_mono(ring, mono) for p in _em.gen_elem(j)))
                    if ech.add(_em.coords(x, d)):
                        out.append(x)
                _cache[d] = out
            return _cache[d]

        lo = em.min_gen_degree()
        hi = em.max_gen_degree() + 2
        gens = minimal_generators(em, epiece, (lo, hi))
        edge_gens[k] = gens
        edge_mods[k] = FreeModule(ring, tuple(-d for d, _ in gens), em.alpha if gens else None)
    rho = {}
    for k, (u, w) in enumerate(g.edges):
        for v in (u, w):
            cols = []
            for (dg, gvec) in stalk_gens[v]:
                img = F.rho[(v, k)].apply(gvec)
                if edge_mods[k].rank == 0:
                    cols.append([ring.zero()] * 0)
                    continue
                coeffs = express_in_generators(F.edge_mods[k], edge_gens[k], img, dg)
                if coeffs is None:
                    raise SplitFailure("edge image not generated by chosen edge basis")
                cols.append(coeffs)
            entries = [[cols[j][i] if cols and edge_mods[k].rank else ring.zero()
                        for j in range(covers[v].rank)]
                       for i in range(edge_mods[k].rank)]
            rho[(v, k)] = ModMap(covers[v], edge_mods[k], 0, entries, check=False)
    sub = Sheaf(g, [covers[v] for v in range(g.nverts)],
                [edge_mods[k] for k in range(g.nedges)], rho)
    # inclusion: generator vectors; projection: express phi(std basis)
    vmaps_i, vmaps_p = [], []
    for v in range(g.nverts):
        stalk = F.stalks[v]
        entries = [[stalk_gens[v][j][1][i] for j in range(covers[v].rank)]
                   for i in range(stalk.rank)]
        vmaps_i.append(ModMap(covers[v], stalk, 0, entries, check=False))
        pent = [[ring.zero()] * stalk.rank for _ in range(covers[v].rank)]
        for j in range(stalk.rank):
            img = phi.vmaps[v].apply(stalk.gen_elem(j))
            coeffs = express_in_generators(stalk, stalk_gens[v], img, -stalk.shifts[j])
            if coeffs is None:
                raise SplitFailure("projection solve failed")
            for i in range(covers[v].rank):
                pent[i][j] = coeffs[i]
        vmaps_p.append(ModMap(stalk, covers[v], 0, pent, check=False))
    emaps_i, emaps_p = [], []
    for k in range(g.nedges):
        em = F.edge_mods[k]
        entries = [[edge_gens[k][j][1][i] for j in range(edge_mods[k].rank)]
                   for i in range(em.rank)]
        emaps_i.append(ModMap(edge_mods[k], em, 0, entries, check=False))
        pent = [[ring.zero()] * em.rank for _ in range(edge_mods[k].rank)]
        for j in range(em.rank):
            img = phi.emaps[k].apply(em.gen_elem(j))
            coeffs = express_in_generators(em, edge_gens[k], img, -em.shifts[j])
            if coeffs is None:
                raise SplitFailure("edge projection solve failed")
            for i in range(edge_mods[k].rank):
                pent[i][j] = coeffs[i]
        emaps_p.append(ModMap(em, edge_mods[k], 0, pent, check=False))
    incl = SheafMorphism(sub, F, 0, vmaps_i, emaps_i, check=False)
    proj = SheafMorphism(F, sub, 0, vmaps_p, emaps_p, check=False)
    return sub, incl, proj


def decompose(graph: MomentGraph, F: Sheaf, normalization: str = PERVERSE,
              verify: bool = True) -> Decomposition:
    """Greedy top-down splitting into twists of canonical indecomposables."""
    summands = []
    cur = F
    incl_chain = SheafMorphism.identity(F)
    proj_chain = SheafMorphism.identity(F)
    guard = 0
    while True:
        supp = cur.support()
        if not supp:
            break
        guard += 1
        if guard > 200:
            raise SplitFailure("splitting did not terminate")
        maximal = [v for v in supp if not any(graph.lt(v, u) for u in supp)]
        maximal.sort(key=lambda v: (-graph.d[v], graph.ids[v]))
        v = maximal[0]
        base = graph.d[v] if normalization == PERVERSE else 0
        twist = cur.stalks[v].shifts[0] - base
        B = canonical_sheaf(graph, v, normalization).twist(twist)
        I = hom_basis(B, cur, 0)
        P = hom_basis(cur, B, 0)
        found = None
        for p in P:
            for i in I:
                c = top_scalar(p.compose(i), v)
                if c:
                    found = (i, p)
                    break
            if found:
                break
        if not found:
            raise SplitFailure("no split pair at vertex %s" % graph.ids[v])
        i, p = found
        phi = p.compose(i)
        psi = invert_endomorphism(B, phi, v)
        p2 = psi.compose(p)
        # idempotent for the complement
        e = i.compose(p2)
        one_minus_e = SheafMorphism.identity(cur).add(e.neg())
        comp, incl, proj = _image_subsheaf(cur, one_minus_e)
        summands.append(Summand(v, twist, B,
                                incl_chain.compose(i), p2.compose(proj_chain)))
        incl_chain = incl_chain.compose(incl)
        proj_chain = proj.compose(proj_chain)
        cur = comp
    if verify:
        _verify_decomposition(F, summands)
    return Decomposition(F, summands)


def _verify_decomposition(F: Sheaf, summands):
    total = SheafMorphism.zero(F, F, 0)
    for k, sk in enumerate(summands):
        for l, sl in enumerate(summands):
            comp = sk.project.compose(sl.include)
            ident = SheafMorphism.identity(sk.sheaf)
            want = ident if k == l else SheafMorphism.zero(sl.sheaf, sk.sheaf, 0)
            if not comp.add(want.neg()).is_zero():
                raise SplitFailure("projections and inclusions are not orthonormal")
        total = total.add(sk.include.compose(sk.project))
    if not total.add(SheafMorphism.identity(F).neg()).is_zero():
        raise SplitFailure("summands do not reassemble the identity")


# -- sections bimodule, localization, translation -----------------------------------


class SectionsBimodule:
    """Global sections of a sheaf on a Bruhat graph, with the diagonal left
    action and the right action twisting the coordinate at x by x(r)."""

    def __init__(self, bg: BruhatGraph, F: Sheaf):
        self.bg = bg
        self.F = F
        self.space = SectionSpace(F, range(F.graph.nverts))

    def piece(self, d):
        return self.space.piece(d)

    def project(self, elem, v):
        return self.space.project(elem, v)

    def left_act(self, elem, r: Poly):
        return tuple(p * r for p in elem)

    def right_act(self, elem, r: Poly):
        out = []
        for v in range(self.F.graph.nverts):
            wr = self.bg.group.act_on_poly(self.bg.elements[v], r)
            for p in self.space.project(elem, v):
                out.append(p * wr)
        return tuple(out)

    def is_section(self, elem, d):
        sp = self.space
        coords = sp.ambient.coords(sp.ambient.reduce_elem(elem), d)
        ech = Echelon(len(sp.ambient.piece_basis(d)))
        for b in sp.piece(d):
            ech.add(sp.ambient.coords(b, d))
        return ech.contains(coords)


class PresentedModule:
    """A graded module presented inside per-vertex ambient coordinates."""

    def __init__(self, graph: MomentGraph, ambients, piece_fn):
        self.graph = graph
        self.ambients = list(ambients)
        self.offsets = []
        off = 0
        for m in self.ambients:
            self.offsets.append(off)
            off += m.rank
        self.total_rank = off
        self._piece_fn = piece_fn
        self._pieces = {}

    def piece(self, d):
        if d not in self._pieces:
            self._pieces[d] = self._piece_fn(d)
        return self._pieces[d]

    def project(self, elem, v):
        off = self.offsets[v]
        return tuple(elem[off + j] for j in range(self.ambients[v].rank))


@dataclass
class LocalizedSheaf:
    sheaf: Sheaf
    gens: dict          # vertex -> list of (degree, ambient element, source element)
    module: PresentedModule


def localize(graph: MomentGraph, pm: PresentedModule, hi: int | None = None,
             check: bool = False, retries: int = 2) -> LocalizedSheaf:
    """Sheaf from a module with per-vertex coordinates: stalks are minimal
    free covers of the coordinate projections, edge data is induced by
    projecting global lifts (well-definedness is exact by construction and
    optionally re-checked)."""
    ring = graph.ring
    lo_all = min((m.min_gen_degree() for m in pm.ambients if m.rank), default=0)
    hi_all = hi if hi is not None else \
        max((m.max_gen_degree() for m in pm.ambients if m.rank), default=0) + 4
    gens = {}
    covers = {}
    for v in range(graph.nverts):
        amb = pm.ambients[v]
        if amb.rank == 0:
            covers[v] = FreeModule(ring, ())
            gens[v] = []
            continue
        source_of = {}
        cache = {}

        def piece(d, _v=v, _amb=amb, _cache=cache, _source=source_of):
            if d not in _cache:
                out = []
                ech = Echelon(len(_amb.piece_basis(d)))
                for n in pm.piece(d):
                    pr = pm.project(n, _v)
                    if ech.add(_amb.coords(pr, d)):
                        out.append(pr)
                        _source[id(pr)] = n
                _cache[d] = out
            return _cache[d]

        lo = amb.min_gen_degree()
        hh = max(hi_all, lo + 2)
        for attempt in range(retries + 1):
            try:
                gv = minimal_generators(amb, piece, (lo, hh))
                break
            except WindowNotStabilized:
                if attempt == retries:
                    raise
                hh += 4
        if not certify_free(amb, gv, piece, (lo, hh)):
            raise LiftAmbiguous("coordinate projection at %s is not free in window"
                                % graph.ids[v])
        gens[v] = [(d, pr, source_of[id(pr)]) for d, pr in gv]
        covers[v] = FreeModule(ring, tuple(-d for d, _ in gv))
    edge_mods = {}
    rho = {}
    for k, (x, y) in enumerate(graph.edges):
        lab = graph.labels[k]
        up = covers[y]
        if up.rank == 0 or covers[x].rank == 0:
            # no edge data needed below an empty stalk; a vanishing lower
            # stalk forces the zero edge module in the canonical picture
            if up.rank and covers[x].rank == 0:
                edge_mods[k] = FreeModule(ring, up.shifts, lab)
                rho[(y, k)] = ModMap.identity(up).retarget(up, edge_mods[k])
                rho[(x, k)] = ModMap.zero(covers[x], edge_mods[k])
            else:
                edge_mods[k] = FreeModule(ring, ())
                rho[(x, k)] = ModMap.zero(covers[x], edge_mods[k])
                rho[(y, k)] = ModMap.zero(up, edge_mods[k])
            continue
        em = FreeModule(ring, up.shifts, lab)
        edge_mods[k] = em
        rho[(y, k)] = ModMap.identity(up).retarget(up, em)
        cols = []
        for (dg, pr, n) in gens[x]:
            py = pm.project(n, y)
            coeffs = express_in_generators(pm.ambients[y],
                                           [(d, p) for d, p, _ in gens[y]], py, dg)
            if coeffs is None:
                raise LiftAmbiguous(
                    "lift of a stalk generator at %s does not project into the "
                    "stalk at %s" % (graph.ids[x], graph.ids[y]))
            cols.append([em.reduce(c) for c in coeffs])
        entries = [[cols[j][i] for j in range(covers[x].rank)] for i in range(em.rank)]
        rho[(x, k)] = ModMap(covers[x], em, 0, entries, check=False)
    sheaf = Sheaf(graph, [covers[v] for v in range(graph.nverts)],
                  [edge_mods[k] for k in range(graph.nedges)], rho)
    out = LocalizedSheaf(sheaf, gens, pm)
    if check:
        _localize_check(graph, out, (lo_all, hi_all))
    return out


def _localize_check(graph, loc: LocalizedSheaf, window):
    """Exactness of the induced edge maps on every presented element: the
    projection of any global lift agrees with rho of the expressed class."""
    pm = loc.module
    F = loc.sheaf
    for d in range(window[0], window[1] + 1):
        for n in pm.piece(d):
            exprs = {}
            for v in range(graph.nverts):
                if F.stalks[v].rank == 0:
                    continue
                pv = pm.project(n, v)
                coeffs = express_in_generators(pm.ambients[v],
                                               [(dd, p) for dd, p, _ in loc.gens[v]],
                                               pv, d)
                if coeffs is None:
                    raise LiftAmbiguous("presented element leaves its own stalk")
                exprs[v] = tuple(coeffs)
            for k, (x, y) in enumerate(graph.edges):
                if F.edge_mods[k].rank == 0 or x not in exprs or y not in exprs:
                    continue
                lhs = F.rho[(x, k)].apply(exprs[x])
                rhs = F.rho[(y, k)].apply(exprs[y])
                if tuple(lhs) != tuple(rhs):
                    raise LiftAmbiguous(
                        "edge maps disagree on a presented element at %s-%s"
                        % (graph.ids[x], graph.ids[y]))


@dataclass
class Translated:
    """pi^{s*} pi^s_* of a sheaf, together with its presentation data."""
    sheaf: Sheaf
    loc: LocalizedSheaf
    partner: tuple     # vertex -> vertex of x s
    s: int


def _partner_map(bg: BruhatGraph, s: int):
    if bg.parabolic is not None:
        raise ValidationError("translation acts on the regular Bruhat graph")
    lookup = {w.index: v for v, w in enumerate(bg.elements)}
    return tuple(lookup[bg.group.right(w, s).index] for w in bg.elements)


def translate(bg: BruhatGraph, s: int, F: Sheaf, check: bool = False) -> Translated:
    """Tensor the sections bimodule with R over the s-invariants via the
    basis {1, delta_s}, delta_s = alpha_s / 2, and localize back."""
    graph = bg.graph
    ring = graph.ring
    half = ring.field.of(1) / ring.field.of(2)
    delta_s = bg.group.realization.alphas[s] * half
    partner = _partner_map(bg, s)
    M = SectionsBimodule(bg, F)
    ambients = [direct_sum([F.stalks[v], F.stalks[partner[v]]])
                for v in range(graph.nverts)]
    twisted_delta = [bg.group.act_on_poly(bg.elements[v], delta_s)
                     for v in range(graph.nverts)]

    def embed(m, mode):
        out = []
        for v in range(graph.nverts):
            a = M.project(m, v)
            b = M.project(m, partner[v])
            if mode:
                t = twisted_delta[v]
                a = tuple(p * t for p in a)
                b = tuple(p * t for p in b)
            out.extend(a)
            out.extend(b)
        return tuple(out)

    def piece_fn(d):
        out = [embed(m, 0) for m in M.piece(d)]
        out += [embed(m, 1) for m in M.piece(d - 2)]
        return out

    pm = PresentedModule(graph, ambients, piece_fn)
    loc = localize(graph, pm, check=check)
    return Translated(loc.sheaf, loc, partner, s)


def translate_morphism(bg: BruhatGraph, s: int, phi: SheafMorphism,
                       TF: Translated, TG: Translated) -> SheafMorphism:
    """The translation of a morphism, expressed on the localized stalks."""
    graph = bg.graph
    ring = graph.ring
    partner = TF.partner
    src, tgt = TF.sheaf, TG.sheaf
    vmaps = []
    for v in range(graph.nverts):
        cols = []
        for (dg, pr, _n) in TF.loc.gens[v]:
            ra = phi.src.stalks[v].rank
            a = pr[:ra]
            b = pr[ra:]
            img = tuple(phi.vmaps[v].apply(a)) + tuple(phi.vmaps[partner[v]].apply(b))
            coeffs = express_in_generators(TG.loc.module.ambients[v],
                                           [(dd, p) for dd, p, _ in TG.loc.gens[v]],
                                           img, dg + phi.delta)
            if coeffs is None:
                raise LiftAmbiguous("translated image leaves the translated stalk")
            cols.append(coeffs)
        entries = [[cols[j][i] for j in range(src.stalks[v].rank)]
                   for i in range(tgt.stalks[v].rank)]
        vmaps.append(ModMap(src.stalks[v], tgt.stalks[v], phi.delta, entries,
                            check=False))
    emaps = _edge_maps_from_upper(src, tgt, vmaps, phi.delta)
    out = SheafMorphism(src, tgt, phi.delta, vmaps, emaps, check=False)
    out.verify()
    return out


def _edge_maps_from_upper(src: Sheaf, tgt: Sheaf, vmaps, delta):
    """Edge components induced from the upper vertex through the quotient
    presentation used by localize (edge module = upper stalk mod label)."""
    g = src.graph
    emaps = []
    for k, (x, y) in enumerate(g.edges):
        sm, tm = src.edge_mods[k], tgt.edge_mods[k]
        if sm.rank == 0 or tm.rank == 0:
            emaps.append(ModMap.zero(sm, tm, delta))
            continue
        entries = [[tm.reduce(p) for p in row] for row in vmaps[y].entries]
        emaps.append(ModMap(sm, tm, delta, entries, check=False))
    return emaps


def translation_counit(bg: BruhatGraph, F: Sheaf, TF: Translated) -> SheafMorphism:
    """mult: translated sheaf -> F, induced by m (x) r -> m r (first
    fiber coordinate)."""
    graph = bg.graph
    ring = graph.ring
    src = TF.sheaf
    vmaps = []
    for v in range(graph.nverts):
        ra = F.stalks[v].rank
        entries = [[TF.loc.gens[v][j][1][i] for j in range(src.stalks[v].rank)]
                   for i in range(ra)]
        vmaps.append(ModMap(src.stalks[v], F.stalks[v], 0, entries, check=False))
    emaps = _edge_maps_from_upper(src, F, vmaps, 0)
    out = SheafMorphism(src, F, 0, vmaps, emaps, check=False)
    out.verify()
    return out


def translation_unit(bg: BruhatGraph, F: Sheaf, TF: Translated) -> SheafMorphism:
    """unit: F -> (translated F){2}, m -> (m alpha_s (x) 1 + m (x) alpha_s)/2,
    carried as a shift-2 morphism into the untwisted translated sheaf."""
    graph = bg.graph
    ring = graph.ring
    tgt = TF.sheaf
    partner = TF.partner
    vmaps = []
    for v in range(graph.nverts):
        stalk = F.stalks[v]
        alpha_tw = bg.group.act_on_poly(bg.elements[v],
                                        bg.group.realization.alphas[TF.s])
        cols = []
        for j in range(stalk.rank):
            e = stalk.gen_elem(j)
            img = tuple(p * alpha_tw for p in e) + \
                tuple(ring.zero() for _ in range(F.stalks[partner[v]].rank))
            coeffs = express_in_generators(TF.loc.module.ambients[v],
                                           [(dd, p) for dd, p, _ in TF.loc.gens[v]],
                                           img, -stalk.shifts[j] + 2)
            if coeffs is None:
                raise LiftAmbiguous("unit image misses the translated stalk")
            cols.append(coeffs)
        entries = [[cols[j][i] for j in range(stalk.rank)]
                   for i in range(tgt.stalks[v].rank)]
        vmaps.append(ModMap(stalk, tgt.stalks[v], 2, entries, check=False))
    emaps = _edge_maps_from_upper(F, tgt, vmaps, 2)
    out = SheafMorphism(F, tgt, 2, vmaps, emaps, check=False)
    out.verify()
    return out


# -- condition (V) ------------------------------------------------------------------


def all_indecomposables(graph: MomentGraph, normalization: str = PERVERSE):
    return [canonical_sheaf(graph, v, normalization) for v in range(graph.nverts)]


def check_condition_V(graph: MomentGraph, family=None):
    from .sheaf import check_V
    if family is None:
        family = all_indecomposables(graph)
    return check_V(family)


def _diamond(ring, a, b, c, d):
    from .graph import MomentGraph as MG
    ids = ["z", "x", "y", "w"]
    dfun = [0, 1, 1, 2]
    less = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]
    edges = [(0, 1), (0, 2), (1, 3), (2, 3)]
    return MG(ring, ids, dfun, less, edges, [a, b, c, d])


def find_non_verma_witness(max_candidates: int = 400):
    """Deterministic search over small generic-label graphs for a failure
    of the Verma-flag condition; returns (graph, vertex_id) or None."""
    import itertools
    from .poly import PolyRing
    from .scalars import QQ
    candidates = []
    ring2 = PolyRing(QQ, 2)
    pool2 = [ring2.var(0), ring2.var(1), ring2.var(0) + ring2.var(1),
             ring2.var(0) - ring2.var(1)]
    for combo in itertools.product(range(len(pool2)), repeat=4):
        if len(set(combo)) < 3:
            continue
        candidates.append(_diamond(ring2, *[pool2[i] for i in combo]))
        if len(candidates) >= 40:
            break
    ring3 = PolyRing(QQ, 3)
    x1, x2, x3 = (ring3.var(i) for i in range(3))
    pool3 = [x1, x2, x3, x1 + x2 + x3, x1 + x2, x1 + x3, x2 + x3]
    for combo in itertools.product(range(len(pool3)), repeat=4):
        if len(set(combo)) < 4:
            continue
        candidates.append(_diamond(ring3, *[pool3[i] for i in combo]))
        if len(candidates) >= max_candidates:
            break
    for g in candidates:
        try:
            ok, witnesses = check_condition_V(g)
        except WindowNotStabilized:
            continue
        if not ok:
            F, vid = witnesses[0]
            return g, vid
    return None

"""The perverse t-structure: per-stratum generator-degree tests on
minimized stalk and costalk complexes, single-stratum truncation, the
stalk/costalk degree criterion for the canonical indecomposables, and the
elementary tilting object (which lives in the constructible category:
its differential squares to zero only after killing the positive-degree
part of the coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bmp import PERVERSE, canonical_sheaf
from .complexes import Complex, Summand, Term, minimize
from .errors import InvariantError, ValidationError
from .gradedmod import FreeModule, ModMap
from .linalg import Echelon, kernel_basis, mat_inv, mat_mul
from .recollement import costalk_complex, stalk_complex
from .sheaf import Sheaf, SheafMorphism, hom_basis


@dataclass
class StratumReport:
    vertex: str
    stalk_gens: dict        # cohomological degree -> sorted module shifts n_k
    costalk_gens: dict
    leq0: bool
    geq0: bool


@dataclass
class PerversityReport:
    strata: list
    leq0: bool
    geq0: bool

    @property
    def in_heart(self):
        return self.leq0 and self.geq0

    def recheck(self, dfun):
        """Recompute the verdicts from the stored generator lists."""
        for sr, d in zip(self.strata, dfun):
            for i, ns in sr.stalk_gens.items():
                assert all(n >= i + d for n in ns) == \
                    all(n >= i + d for n in sr.stalk_gens[i])
        return True


def _gen_lists(point_complex: Complex):
    m, _, _, _ = minimize(point_complex, witness=False)
    out = {}
    for i in m.degrees():
        out[i] = sorted(n for s in m.term(i).summands for n in s.sheaf.stalks[0].shifts)
    return out


def perversity_check(C: Complex) -> PerversityReport:
    """Stalk generators must sit in degrees >= i + d_x, costalk generators
    in degrees <= i + d_x, after minimization, stratum by stratum."""
    if C.normalization != PERVERSE:
        raise ValidationError("perversity is checked in the perverse normalization")
    graph = C.graph
    supp = sorted({v for i in C.degrees() for s in C.term(i).summands
                   for v in s.sheaf.support()})
    strata = []
    all_leq = all_geq = True
    for v in supp:
        d = graph.d[v]
        sg = _gen_lists(stalk_complex(C, v))
        cg = _gen_lists(costalk_complex(C, v))
        leq = all(n >= i + d for i, ns in sg.items() for n in ns)
        geq = all(n <= i + d for i, ns in cg.items() for n in ns)
        strata.append(StratumReport(graph.ids[v], sg, cg, leq, geq))
        all_leq &= leq
        all_geq &= geq
    return PerversityReport(strata, all_leq, all_geq)


def truncate_stratum(M: Complex, d_s: int):
    """Single-stratum perverse truncation: the subcomplex L built from the
    kernel of the threshold scalar component plus all higher-shift parts,
    and the quotient N, with inclusion/projection data.

    M must be a complex on a one-vertex graph.  Returns (L, N, incl, proj)
    where incl/proj are per-degree ModMaps on the stalk.
    """
    pg = M.graph
    if pg.nverts != 1 or pg.nedges != 0:
        raise ValidationError("truncation acts on single-stratum complexes")
    ring = pg.ring
    field = ring.field
    # transform each term by an invertible scalar change of basis adapted
    # to the kernel of the threshold component
    degs = M.degrees()
    shifts = {i: list(M.term(i).total.stalks[0].shifts) for i in degs}
    mats = {i: M.diff(i).vmaps[0] for i in degs if i + 1 in M.terms}
    basis_change = {}
    keep_L = {}
    for i in degs:
        j0 = i + d_s
        idxs = [k for k, n in enumerate(shifts[i]) if n == j0]
        high = [k for k, n in enumerate(shifts[i]) if n > j0]
        if not idxs:
            basis_change[i] = None
            keep_L[i] = sorted(high)
            continue
        # scalar block of d^i between the shift-j0 parts
        tgt_idxs = [k for k, n in enumerate(shifts.get(i + 1, [])) if n == j0]
        rows = []
        nv = ring.nvars
        for tk in tgt_idxs:
            row = []
            for sk in idxs:
                p = mats[i].entries[tk][sk] if i in mats else ring.zero()
                row.append(p.terms.get((0,) * nv, field.zero))
            rows.append(row)
        ker = kernel_basis(rows, len(idxs), field) if rows else \
            [[field.one if a == b else field.zero for a in range(len(idxs))]
             for b in range(len(idxs))]
        # complete the kernel to an invertible matrix (columns)
        ech = Echelon(len(idxs))
        cols = [list(v) for v in ker]
        for v in cols:
            ech.add(list(v))
        for a in range(len(idxs)):
            unit = [field.zero] * len(idxs)
            unit[a] = field.one
            if ech.add(unit):
                cols.append(unit)
        U = [[cols[c][r] for c in range(len(cols))] for r in range(len(idxs))]
        basis_change[i] = (idxs, U, len(ker))
        keep_L[i] = sorted(high) + ["k%d" % a for a in range(len(ker))]
    # build the transformed complex explicitly
    def transform(i):
        n = len(shifts[i])
        T = [[ring.one() if a == b else ring.zero() for b in range(n)] for a in range(n)]
        if basis_change[i]:
            idxs, U, _ = basis_change[i]
            for a, ka in enumerate(idxs):
                for b, kb in enumerate(idxs):
                    T[ka][kb] = ring.const(U[a][b])
        return T

    def transform_inv(i):
        n = len(shifts[i])
        T = [[field.one if a == b else field.zero for b in range(n)] for a in range(n)]
        if basis_change[i]:
            idxs, U, _ = basis_change[i]
            Ui = mat_inv(U, field)
            for a, ka in enumerate(idxs):
                for b, kb in enumerate(idxs):
                    T[ka][kb] = Ui[a][b]
        return [[ring.const(c) for c in row] for row in T]

    newmats = {}
    for i in degs:
        if i not in mats:
            continue
        n_src, n_tgt = len(shifts[i]), len(shifts[i + 1])
        A = mats[i].entries
        Ti = transform(i)
        Tinv = transform_inv(i + 1)
        prod = [[sum((Tinv[a][k] * sum((A[k][l] * Ti[l][b] for l in range(n_src)
                                        if A[k][l] and Ti[l][b]), ring.zero())
                      for k in range(n_tgt) if Tinv[a][k]), ring.zero())
                 for b in range(n_src)] for a in range(n_tgt)]
        newmats[i] = prod
    # selection of L-indices in the transformed basis
    sel = {}
    for i in degs:
        j0 = i + d_s
        out = [k for k, n in enumerate(shifts[i]) if n > j0]
        if basis_change[i]:
            idxs, U, nker = basis_change[i]
            out += idxs[:nker] if False else [idxs[a] for a in range(nker)]
        sel[i] = sorted(out)
    L_terms, N_terms, L_mats, N_mats = {}, {}, {}, {}
    incl, proj = {}, {}
    for i in degs:
        keep = sel[i]
        drop = [k for k in range(len(shifts[i])) if k not in keep]
        L_terms[i] = [shifts[i][k] for k in keep]
        N_terms[i] = [shifts[i][k] for k in drop]
        if i in newmats:
            keep2 = sel[i + 1]
            drop2 = [k for k in range(len(shifts[i + 1])) if k not in keep2]
            L_mats[i] = [[newmats[i][a][b] for b in keep] for a in keep2]
            N_mats[i] = [[newmats[i][a][b] for b in drop] for a in drop2]
            # exactness of the split: no component from L into N
            for a in drop2:
                for b in keep:
                    if newmats[i][a][b]:
                        raise InvariantError("truncation does not split the differential")
    def assemble(term_shifts, mats_):
        terms = {}
        base = pg.d[0]
        for i, sh in term_shifts.items():
            if not sh:
                continue
            ss = [Summand((0, n - base), Sheaf(pg, [FreeModule(ring, (n,))], [], {}))
                  for n in sh]
            terms[i] = Term(pg, ss)
        diffs = {}
        for i, ent in mats_.items():
            if i in terms and i + 1 in terms:
                diffs[i] = SheafMorphism(
                    terms[i].total, terms[i + 1].total, 0,
                    [ModMap(terms[i].total.stalks[0], terms[i + 1].total.stalks[0],
                            0, ent, check=False)], [], check=False)
        return Complex(pg, M.normalization, terms, diffs)
    L = assemble(L_terms, L_mats)
    N = assemble(N_terms, N_mats)
    return L, N, sel


def soergel_degree_conditions(graph, w: int, normalization=PERVERSE):
    """Stalk generators strictly above, costalk generators strictly below
    the length threshold at every lower vertex (perverse normalization:
    stalk degrees < -l(x), costalk degrees > -l(x))."""
    from .sheaf import costalk_generators
    F = canonical_sheaf(graph, w, normalization)
    verdicts = {}
    for x in range(graph.nverts):
        if x == w or not graph.lt(x, w):
            continue
        lx = graph.d[x]
        stalk_degs = [-n for n in F.stalks[x].shifts]
        cost = costalk_generators(F, x, list(graph.up_edges(x)))
        cost_degs = [dg for dg, _ in cost]
        ok2 = all(dg < -lx for dg in stalk_degs)
        ok3 = all(dg > -lx for dg in cost_degs)
        verdicts[graph.ids[x]] = {"stalk_degrees": sorted(stalk_degs),
                                  "costalk_degrees": sorted(cost_degs),
                                  "stalk_ok": ok2, "costalk_ok": ok3,
                                  "ok": ok2 and ok3}
    return verdicts


# -- the elementary tilting object (constructible) ---------------------------------


@dataclass
class TiltingObject:
    """Three-term complex k{-1} -> (canonical at s) -> k{1}; a complex only
    after the forgetful functor (the composite is a positive-degree
    multiple of the identity)."""
    graph: object
    s: int
    eta: SheafMorphism
    eps: SheafMorphism
    terms: dict


def tilting_object(graph, s: int, e: int) -> TiltingObject:
    E1 = canonical_sheaf(graph, e, PERVERSE)
    Es = canonical_sheaf(graph, s, PERVERSE)
    etas = hom_basis(E1.twist(-1), Es, 0)
    epss = hom_basis(Es, E1.twist(1), 0)
    if len(etas) != 1 or len(epss) != 1:
        raise InvariantError("expected one-dimensional adjunction hom spaces")
    eta, eps = etas[0], epss[0]
    nv = graph.ring.nvars
    comp = eps.compose(eta)
    for m in comp.vmaps:
        for row in m.entries:
            for p in row:
                if p.terms.get((0,) * nv):
                    raise InvariantError("tilting composite is not constructibly zero")
    terms = {-1: [( e, -1)], 0: [(s, 0)], 1: [(e, 1)]}
    return TiltingObject(graph, s, eta, eps, terms)


def _scalar_part(mm: ModMap, field, nv):
    out = []
    for i, row in enumerate(mm.entries):
        orow = []
        for j, p in enumerate(row):
            if mm.tgt.shifts[i] == mm.src.shifts[j] + mm.delta:
                orow.append(p.terms.get((0,) * nv, field.zero))
            else:
                orow.append(field.zero)
        out.append(orow)
    return out


def scalar_minimal_model(shift_lists: dict, mats: dict, field):
    """Minimal model of a complex of graded vector spaces: eliminate
    invertible scalar components between equal shifts."""
    shifts = {i: list(v) for i, v in shift_lists.items()}
    mats = {i: [row[:] for row in m] for i, m in mats.items()}
    while True:
        pick = None
        for i in sorted(mats):
            m = mats[i]
            for a, row in enumerate(m):
                for b, c in enumerate(row):
                    if c and shifts[i + 1][a] == shifts[i][b]:
                        pick = (i, a, b, c)
                        break
                if pick:
                    break
            if pick:
                break
        if not pick:
            break
        i, a, b, c = pick
        m = mats[i]
        nr, nc = len(shifts[i + 1]), len(shifts[i])
        newm = [[m[x][y] - m[x][b] * m[a][y] / c for y in range(nc) if y != b]
                for x in range(nr) if x != a]
        # adjacent differentials: drop the eliminated row/column
        if i - 1 in mats:
            mats[i - 1] = [row for x, row in enumerate(mats[i - 1]) if x != b]
        if i + 1 in mats:
            mats[i + 1] = [[row[y] for y in range(nr) if y != a]
                           for row in mats[i + 1]]
        mats[i] = newm
        shifts[i] = [n for y, n in enumerate(shifts[i]) if y != b]
        shifts[i + 1] = [n for x, n in enumerate(shifts[i + 1]) if x != a]
    # verify d d = 0 on the result
    for i in sorted(mats):
        if i + 1 in mats and shifts.get(i) and shifts.get(i + 2):
            prod = mat_mul(mats[i + 1], mats[i], field)
            if any(any(c for c in row) for row in prod):
                raise InvariantError("scalar differential does not square to zero")
    return {i: v for i, v in shifts.items() if v}, mats


def tilting_perversity(t: TiltingObject) -> PerversityReport:
    """Constructible perversity of the tilting object: scalar stalk and
    costalk complexes per stratum."""
    from .sheaf import costalk_generators
    from .gradedmod import express_in_generators
    graph = t.graph
    field = graph.ring.field
    nv = graph.ring.nvars
    sheaves = {-1: t.eta.src, 0: t.eta.tgt, 1: t.eps.tgt}
    omaps = {-1: t.eta, 0: t.eps}
    supp = sorted({v for F in sheaves.values() for v in F.support()})
    strata = []
    all_leq = all_geq = True
    for v in supp:
        d = graph.d[v]
        # scalar stalk complex
        sh = {i: list(F.stalks[v].shifts) for i, F in sheaves.items()
              if F.stalks[v].rank}
        mats = {}
        for i, mm in omaps.items():
            if i in sh and i + 1 in sh:
                mats[i] = _scalar_part(mm.vmaps[v], field, nv)
        red, _ = scalar_minimal_model(sh, mats, field)
        leq = all(n >= i + d for i, ns in red.items() for n in ns)
        sg = {i: sorted(ns) for i, ns in red.items()}
        # scalar costalk complex
        gens = {i: costalk_generators(F, v, list(graph.up_edges(v)))
                for i, F in sheaves.items()}
        csh = {i: [-dg for dg, _ in g] for i, g in gens.items() if g}
        cmats = {}
        for i, mm in omaps.items():
            if i in csh and i + 1 in csh:
                stalk = sheaves[i + 1].stalks[v]
                cols = []
                for (dg, vec) in gens[i]:
                    img = mm.vmaps[v].apply(vec)
                    coeffs = express_in_generators(stalk, gens[i + 1], img, dg)
                    cols.append(coeffs)
                ent = [[cols[b][a] for b in range(len(gens[i]))]
                       for a in range(len(gens[i + 1]))]
                scal = []
                for a in range(len(gens[i + 1])):
                    row = []
                    for b in range(len(gens[i])):
                        if gens[i + 1][i if False else a][0] == gens[i][b][0]:
                            row.append(ent[a][b].terms.get((0,) * nv, field.zero))
                        else:
                            row.append(field.zero)
                    scal.append(row)
                cmats[i] = scal
        credd, _ = scalar_minimal_model(csh, cmats, field)
        geq = all(n <= i + d for i, ns in credd.items() for n in ns)
        cg = {i: sorted(ns) for i, ns in credd.items()}
        strata.append(StratumReport(graph.ids[v], sg, cg, leq, geq))
        all_leq &= leq
        all_geq &= geq
    return PerversityReport(strata, all_leq, all_geq)

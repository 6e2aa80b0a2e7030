"""The Braden-MacPherson construction, splitting, the sections bridge,
and the translation construction."""

import pytest

from momix.bmp import (CLASSIFICATION, PERVERSE, PresentedModule, SectionsBimodule,
                       bruhat_graph, build_bmp, canonical_sheaf, check_condition_V,
                       decompose, find_non_verma_witness, localize, stalk_character,
                       translate, translate_morphism, translation_counit,
                       translation_unit)
from momix.coxeter import kl_polynomial
from momix.errors import SplitFailure
from momix.sheaf import hom_basis, hom_dim, sheaf_direct_sum, verify_bmp


def test_a1_picture(a1):
    gr = a1.graph
    obj = build_bmp(gr, gr.index("s"), PERVERSE)
    F = obj.sheaf
    assert F.stalks[gr.index("s")].shifts == (1,)
    assert F.stalks[gr.index("e")].shifts == (1,)
    em = F.edge_mods[0]
    assert em.shifts == (1,) and em.alpha == gr.labels[0]
    assert verify_bmp(F)["ok"]
    obj.verify()


def test_minimal_vertex_build(a2):
    gr = a2.graph
    obj = build_bmp(gr, gr.index("e"), PERVERSE)
    assert obj.sheaf.support() == (gr.index("e"),)
    assert obj.sheaf.stalks[gr.index("e")].shifts == (0,)


def test_a2_top_all_rank_one(a2):
    gr = a2.graph
    F = build_bmp(gr, gr.index("sts"), PERVERSE).sheaf
    assert all(F.stalks[v].shifts == (3,) for v in range(gr.nverts))


def test_characters_match_kl(a2, b2):
    for bg in (a2, b2):
        gr = bg.graph
        g = bg.group
        for wv in range(gr.nverts):
            F = build_bmp(gr, wv, CLASSIFICATION).sheaf
            w = bg.elements[wv]
            for xv in range(gr.nverts):
                x = bg.elements[xv]
                ch = stalk_character(F, xv)
                if g.bruhat_leq(x, w):
                    P = kl_polynomial(g, x, w)
                    assert ch == tuple(sorted(2 * k for k, c in enumerate(P.coeffs)
                                              for _ in range(c)))
                else:
                    assert ch == ()


def test_build_independent_of_linear_extension(a2):
    gr = a2.graph
    for wv in range(gr.nverts):
        one = build_bmp(gr, wv, PERVERSE).sheaf
        other = build_bmp(gr, wv, PERVERSE, reverse_ties=True).sheaf
        assert [m.shifts for m in one.stalks] == [m.shifts for m in other.stalks]
        dec = decompose(gr, other, PERVERSE)
        assert dec.multiset(gr) == [(gr.ids[wv], 0)]


def test_decompose(a2):
    gr = a2.graph
    Es = canonical_sheaf(gr, gr.index("s"), PERVERSE)
    E1 = canonical_sheaf(gr, gr.index("e"), PERVERSE)
    assert decompose(gr, Es, PERVERSE).multiset(gr) == [("s", 0)]
    total, _, _ = sheaf_direct_sum([Es, E1.twist(2)])
    assert decompose(gr, total, PERVERSE).multiset(gr) == [("e", 2), ("s", 0)]
    # uniqueness across all indecomposables
    for v in range(gr.nverts):
        F = canonical_sheaf(gr, v, PERVERSE)
        assert decompose(gr, F, PERVERSE).multiset(gr) == [(gr.ids[v], 0)]


def test_support_and_normalizations(a2):
    gr = a2.graph
    for wv in range(gr.nverts):
        Fp = canonical_sheaf(gr, wv, PERVERSE)
        Fc = build_bmp(gr, wv, CLASSIFICATION).sheaf
        assert Fc.stalks[wv].shifts == (0,)
        assert Fp.stalks[wv].shifts == (gr.d[wv],)
        for y in range(gr.nverts):
            if not gr.leq(y, wv):
                assert Fp.stalks[y].rank == 0
            # the two normalizations differ by a global twist
            assert Fp.stalks[y].shifts == tuple(n + gr.d[wv] for n in Fc.stalks[y].shifts)


def test_sections_bimodule_actions(a1):
    gr = a1.graph
    Es = canonical_sheaf(gr, gr.index("s"), PERVERSE)
    M = SectionsBimodule(a1, Es)
    ring = gr.ring
    x = ring.var(0)
    for d in (-1, 1, 3):
        for m in M.piece(d):
            assert M.is_section(M.left_act(m, x), d + 2)
            assert M.is_section(M.right_act(m, x), d + 2)
    # left and right actions commute
    m = M.piece(-1)[0]
    lr = M.right_act(M.left_act(m, x), x)
    rl = M.left_act(M.right_act(m, x), x)
    assert lr == rl
    # right action twists the coordinate at s by s(x) = -x
    s_el = a1.elements[gr.index("s")]
    acted = M.right_act(m, x)
    a, b = m[0], m[1]
    assert acted[0] == a * x and acted[1] == b * a1.group.act_on_poly(s_el, x)


def test_localize_roundtrip(a2):
    gr = a2.graph
    for v in range(gr.nverts):
        F = canonical_sheaf(gr, v, PERVERSE)
        M = SectionsBimodule(a2, F)
        pm = PresentedModule(gr, list(F.stalks), M.piece)
        loc = localize(gr, pm, check=True)
        assert all(loc.sheaf.stalks[u].shifts == F.stalks[u].shifts
                   for u in range(gr.nverts))
        assert decompose(gr, loc.sheaf, PERVERSE).multiset(gr) == [(gr.ids[v], 0)]


def test_translate(a1, a2):
    gr1 = a1.graph
    T = translate(a1, 0, canonical_sheaf(gr1, gr1.index("e"), PERVERSE), check=True)
    assert decompose(gr1, T.sheaf, PERVERSE).multiset(gr1) == [("s", -1)]
    # additive on direct sums
    gr = a2.graph
    E1 = canonical_sheaf(gr, gr.index("e"), PERVERSE)
    Et = canonical_sheaf(gr, gr.index("t"), PERVERSE)
    total, _, _ = sheaf_direct_sum([E1, Et])
    Tsum = translate(a2, 0, total)
    d = decompose(gr, Tsum.sheaf, PERVERSE).multiset(gr)
    T1 = decompose(gr, translate(a2, 0, E1).sheaf, PERVERSE).multiset(gr)
    Tt = decompose(gr, translate(a2, 0, Et).sheaf, PERVERSE).multiset(gr)
    assert d == sorted(T1 + Tt)
    # translation of E_t by s is indecomposable with top vertex ts
    assert [lab for lab, _ in [(x[0], x[1]) for x in Tt]] == ["ts"]


def test_translation_naturality(a1):
    gr = a1.graph
    E1 = canonical_sheaf(gr, gr.index("e"), PERVERSE)
    Es = canonical_sheaf(gr, gr.index("s"), PERVERSE)
    eta = hom_basis(E1.twist(-1), Es, 0)[0]
    TE1 = translate(a1, 0, E1.twist(-1))
    TEs = translate(a1, 0, Es)
    Teta = translate_morphism(a1, 0, eta, TE1, TEs)
    # counit is natural: mult_Es (x) T(eta) = eta (x) mult_{E1{-1}}
    m1 = translation_counit(a1, Es, TEs)
    m2 = translation_counit(a1, E1.twist(-1), TE1)
    lhs = m1.compose(Teta)
    rhs = eta.compose(m2)
    assert lhs.add(rhs.neg()).is_zero()
    # unit is natural as well
    u1 = translation_unit(a1, E1.twist(-1), TE1)
    u2 = translation_unit(a1, Es, TEs)
    lhs = Teta  # placeholder for shape
    left = u2.compose(eta)
    right_raw = translate_morphism(a1, 0, eta, TE1, TEs)
    # T(eta) as a shift-2 target map
    from momix.sheaf import SheafMorphism
    right = SheafMorphism(eta.src, TEs.sheaf, 2,
                          [a.compose(b) for a, b in zip(right_raw.vmaps, u1.vmaps)],
                          [a.compose(b) for a, b in zip(right_raw.emaps, u1.emaps)],
                          check=False)
    assert left.add(right.neg()).is_zero()


def test_theta_adjunction_dims(a2):
    gr = a2.graph
    for x, y in (("e", "s"), ("s", "t"), ("st", "sts")):
        F = canonical_sheaf(gr, gr.index(x), PERVERSE)
        G = canonical_sheaf(gr, gr.index(y), PERVERSE)
        TF = translate(a2, 0, F).sheaf
        TG = translate(a2, 0, G).sheaf
        assert hom_dim(TF, G, 0) == hom_dim(F, TG.twist(2), 0)


def test_condition_v(a2, b2):
    for bg in (a2, b2):
        ok, wit = check_condition_V(bg.graph)
        assert ok and not wit
    res = find_non_verma_witness()
    assert res is not None
    graph, vid = res
    ok, wit = check_condition_V(graph)
    assert not ok and any(w[1] == vid for w in wit)

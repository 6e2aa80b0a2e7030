"""Moment graphs, sections, naive functors, and sheaf Hom spaces."""

import pytest

from momix.bmp import PERVERSE, bruhat_graph, canonical_sheaf, quotient_morphism
from momix.errors import NotClosed, ValidationError
from momix.graph import GraphMorphism, MomentGraph
from momix.poly import PolyRing
from momix.scalars import QQ
from momix.sheaf import (SectionSpace, Sheaf, SheafMorphism, corestrict,
                         extend_by_zero, hom_basis, hom_dim, hom_module_generators,
                         pullback, pullback_morphism, restrict, restriction_unit,
                         sections, verify_bmp, zero_sheaf)


def test_graph_validation():
    R = PolyRing(QQ, 2)
    x = R.var(0)
    with pytest.raises(ValidationError):
        MomentGraph(R, ["a", "b"], [0, 1], [], [(0, 1)], [x])  # incomparable edge
    with pytest.raises(ValidationError):
        MomentGraph(R, ["a", "b"], [0, 1], [(0, 1), (1, 0)], [], [])
    g = MomentGraph(R, ["a", "b"], [0, 1], [(0, 1)], [(0, 1)], [x])
    assert g.is_open({1}) and not g.is_open({0})
    assert g.is_closed({0}) and not g.is_closed({1})
    assert g.up_edges(0) == (0,) and g.down_edges(1) == (0,)


def test_sections_examples(a1, a2):
    gr1 = a1.graph
    Es1 = canonical_sheaf(gr1, gr1.index("s"), PERVERSE)
    # empty set: no sections in any degree
    assert all(not v for v in sections(Es1, [], range(-3, 4)).values())
    # rank-one picture: one section in degree -1
    sp = SectionSpace(Es1, range(gr1.nverts))
    assert len(sp.piece(-1)) == 1
    gr2 = a2.graph
    Es2 = canonical_sheaf(gr2, gr2.index("s"), PERVERSE)
    sp2 = SectionSpace(Es2, [gr2.index("e"), gr2.index("s")])
    assert len(sp2.piece(1)) == 3


def test_restrict_extend_corestrict(a2):
    gr = a2.graph
    F = canonical_sheaf(gr, gr.index("sts"), PERVERSE)
    allv = set(range(gr.nverts))
    assert restrict(F, allv).stalks == F.stalks
    Z = gr.down_set(gr.index("s"))
    rF = restrict(F, Z)
    # i^[*] i_* = id on data supported in Z
    assert restrict(extend_by_zero(rF, Z), Z).stalks == rF.stalks
    with pytest.raises(NotClosed):
        extend_by_zero(F, {gr.index("sts")})
    # corestriction with Z = X is the identity with identity counit
    co = corestrict(F, allv)
    assert all(co.sheaf.stalks[v].shifts == F.stalks[v].shifts
               for v in range(gr.nverts))
    # A2, Z = {e}: costalk of the top sheaf is R{-3}
    co1 = corestrict(F, {gr.index("e")})
    assert co1.sheaf.stalks[gr.index("e")].shifts == (-3,)
    co1.counit.verify()
    # unit of restriction
    eps = restriction_unit(F, Z)
    eps.verify()


def test_restriction_composes(a2):
    gr = a2.graph
    F = canonical_sheaf(gr, gr.index("sts"), PERVERSE)
    Z = gr.down_set(gr.index("st"))
    Z2 = gr.down_set(gr.index("s"))
    once = restrict(F, Z2)
    twice = restrict(restrict(F, Z), Z2)
    assert once.stalks == twice.stalks and once.edge_mods == twice.edge_mods


def test_adjunction_dimensions(a2):
    """Hom(G, i_* F) = Hom(i^[*] G, F) and Hom(i_! F, G) = Hom(F, i^[!] G),
    dimension by dimension."""
    gr = a2.graph
    G = canonical_sheaf(gr, gr.index("st"), PERVERSE)
    Z = gr.down_set(gr.index("s"))
    Fz = restrict(canonical_sheaf(gr, gr.index("s"), PERVERSE), Z)
    iF = extend_by_zero(Fz, Z)
    zdom = sorted(Z)
    for d in range(-4, 5):
        assert hom_dim(G, iF, d) == hom_dim(restrict(G, Z), Fz, d, domain=zdom)
        co = corestrict(G, Z)
        assert hom_dim(iF, G, d) == hom_dim(Fz, co.sheaf, d, domain=zdom)


def test_pseudo_dt_dimension_identities(a2):
    gr = a2.graph
    E = canonical_sheaf(gr, gr.index("ts"), PERVERSE)
    F = canonical_sheaf(gr, gr.index("sts"), PERVERSE)
    Z = gr.down_set(gr.index("t"))
    U = [v for v in range(gr.nverts) if v not in Z]
    for d in range(-4, 5):
        full = hom_dim(E, F, d)
        u = hom_dim(E, F, d, domain=U)
        assert full == hom_dim(restrict(E, Z), F, d) + u
        assert full == hom_dim(E, corestrict(F, Z).sheaf, d) + u


def test_pullback(a2, ws):
    gr = a2.graph
    ident = GraphMorphism(gr, gr, list(range(gr.nverts)))
    F = canonical_sheaf(gr, gr.index("st"), PERVERSE)
    assert pullback(ident, F).stalks == F.stalks
    # the quotient to the parabolic graph: pull back the constant sheaf on
    # the closed coset
    g = a2.group
    pg = bruhat_graph(g, 0)
    pi = quotient_morphism(a2, pg)
    Ep = canonical_sheaf(pg.graph, 0, PERVERSE)  # skyscraper on the bottom coset
    back = pullback(pi, Ep)
    e_i, s_i = gr.index("e"), gr.index("s")
    assert back.stalks[e_i].rank == 1 and back.stalks[s_i].rank == 1
    k = gr.edge_key(e_i, s_i)
    assert back.edge_mods[k].alpha == gr.labels[k]
    # functoriality on a composable pair
    phi = hom_basis(Ep, Ep, 0)[0]
    psi = hom_basis(Ep, Ep, 2)[0]
    lhs = pullback_morphism(pi, psi.compose(phi))
    rhs = pullback_morphism(pi, psi).compose(pullback_morphism(pi, phi))
    assert lhs.add(rhs.neg()).is_zero()


def test_verify_bmp_detects_failure(a1):
    gr = a1.graph
    F = canonical_sheaf(gr, gr.index("s"), PERVERSE)
    # break BMP2: zero out the upper structure map
    from momix.gradedmod import ModMap
    rho = dict(F.rho)
    k = gr.edge_key(gr.index("e"), gr.index("s"))
    rho[(gr.index("s"), k)] = ModMap.zero(F.stalks[gr.index("s")], F.edge_mods[k])
    bad = Sheaf(gr, F.stalks, F.edge_mods, rho)
    rep = verify_bmp(bad)
    assert not rep["ok"]
    assert any(f[0].startswith("BMP2") for f in rep["failures"])


def test_hom_examples(a1):
    gr = a1.graph
    E1 = canonical_sheaf(gr, gr.index("e"), PERVERSE)
    Es = canonical_sheaf(gr, gr.index("s"), PERVERSE)
    assert len(hom_basis(E1.twist(-1), Es, 0)) == 1
    assert len(hom_basis(Es, E1.twist(1), 0)) == 1
    # Hom(E_1, E_1) has the graded dimensions of R, generated by one map
    for d in range(0, 7):
        assert hom_dim(E1, E1, d) == gr.ring.dim_piece(d)
    gens, free = hom_module_generators(E1, E1, (-2, 8))
    assert free and [g for g, _ in gens] == [0]
    gens2, free2 = hom_module_generators(Es, Es, (-2, 8))
    assert free2 and [g for g, _ in gens2] == [0, 2]


def test_zero_sheaf(a1):
    z = zero_sheaf(a1.graph)
    assert z.is_zero() and verify_bmp(z)["ok"]

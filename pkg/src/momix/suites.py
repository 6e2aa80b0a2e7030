"""Named verification suites: each returns a list of case records
(name, ok, detail).  The CLI prints them with timings; the acceptance
tests assert them.  Everything is exact; a case fails only on a genuine
mismatch (tolerance zero).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .bmp import (CLASSIFICATION, PERVERSE, PresentedModule, SectionsBimodule,
                  bruhat_graph, build_bmp, canonical_sheaf, check_condition_V,
                  decompose, find_non_verma_witness, localize, stalk_character,
                  translate)
from .complexes import HomComplex, forget_hom, is_homotopy_equiv, khom, minimize
from .coxeter import CoxeterGroup, geometric_realization, kl_polynomial, named_system
from .errors import MomixError
from .perverse import perversity_check, soergel_degree_conditions
from .recollement import costandard_complex, standard_complex
from .rouquier import (LetterContext, apply_letters, assoc_lengths, delta_letters,
                       inverse_pair, letter_E, letter_F, nabla_letters, ringel_check,
                       triangle_check, unit_complex)
from .sheaf import corestrict, hom_dim, restrict, verify_bmp

SUITE_NAMES = ("axioms", "ses", "vcond", "kl", "vanishing", "braid",
               "rouquier-formula", "perverse", "convolution", "ringel", "soergel")

A3_LENGTH_CAP = 4


class Workspace:
    """Lazy shared objects per Coxeter type."""

    def __init__(self):
        self._groups = {}
        self._graphs = {}
        self._ctxs = {}

    def group(self, name) -> CoxeterGroup:
        if name not in self._groups:
            self._groups[name] = CoxeterGroup(geometric_realization(named_system(name)))
        return self._groups[name]

    def bruhat(self, name):
        if name not in self._graphs:
            self._graphs[name] = bruhat_graph(self.group(name))
        return self._graphs[name]

    def ctx(self, name) -> LetterContext:
        if name not in self._ctxs:
            self._ctxs[name] = LetterContext(self.bruhat(name))
        return self._ctxs[name]


@dataclass
class Case:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0


def _case(cases, name, fn):
    t0 = time.time()
    try:
        ok, detail = fn()
    except MomixError as exc:
        ok, detail = False, "%s: %s" % (type(exc).__name__, exc)
    cases.append(Case(name, bool(ok), str(detail), time.time() - t0))


def _tops(ws: Workspace, name):
    bg = ws.bruhat(name)
    cap = A3_LENGTH_CAP if name == "A3" else None
    return [v for v in range(bg.graph.nverts)
            if cap is None or bg.graph.d[v] <= cap]


# -- axioms (plus the round-trip and translation-square identities) ---------------


def suite_axioms(ws: Workspace, types=("A1", "A2", "B2", "A3"), seed=0):
    cases = []
    for name in types:
        bg = ws.bruhat(name)
        gr = bg.graph
        for v in _tops(ws, name):
            def chk(v=v, gr=gr):
                obj = build_bmp(gr, v, PERVERSE)
                rep = verify_bmp(obj.sheaf)
                return rep["ok"], rep["failures"][:2] if not rep["ok"] else "pass"
            _case(cases, "%s:bmp-axioms:%s" % (name, gr.ids[v]), chk)
    if "A2" in types:
        bg = ws.bruhat("A2")
        gr = bg.graph
        for v in range(gr.nverts):
            def chk(v=v):
                F = canonical_sheaf(gr, v, PERVERSE)
                M = SectionsBimodule(bg, F)
                pm = PresentedModule(gr, list(F.stalks), M.piece)
                loc = localize(gr, pm, check=True)
                same_stalks = all(loc.sheaf.stalks[u].shifts == F.stalks[u].shifts
                                  for u in range(gr.nverts))
                dec = decompose(gr, loc.sheaf, PERVERSE)
                return (same_stalks and dec.multiset(gr) == [(gr.ids[v], 0)],
                        dec.multiset(gr))
            _case(cases, "A2:roundtrip:%s" % gr.ids[v], chk)
    for name in [t for t in types if t in ("A1", "A2")]:
        bg = ws.bruhat(name)
        gr = bg.graph

        def chk(bg=bg, gr=gr):
            e = gr.index("e")
            E1 = canonical_sheaf(gr, e, PERVERSE)
            T1 = translate(bg, 0, E1).sheaf
            T2 = translate(bg, 0, T1).sheaf
            d1 = decompose(gr, T1, PERVERSE).multiset(gr)
            d2 = decompose(gr, T2, PERVERSE).multiset(gr)
            want = sorted((vid, n + k) for (vid, n) in d1 for k in (0, -2))
            return d2 == want, (d1, d2)
        _case(cases, "%s:translate-square" % name, chk)
    return cases


# -- Kazhdan-Lusztig characters ------------------------------------------------


def suite_kl(ws: Workspace, types=("A2", "B2", "A3"), seed=0):
    cases = []
    for name in types:
        bg = ws.bruhat(name)
        gr = bg.graph
        g = bg.group
        for wv in _tops(ws, name):
            def chk(wv=wv):
                obj = build_bmp(gr, wv, CLASSIFICATION)
                w = bg.elements[wv]
                for xv in range(gr.nverts):
                    x = bg.elements[xv]
                    ch = stalk_character(obj.sheaf, xv)
                    if g.bruhat_leq(x, w):
                        P = kl_polynomial(g, x, w)
                        want = tuple(sorted(2 * k for k, c in enumerate(P.coeffs)
                                            for _ in range(c)))
                        if ch != want:
                            return False, (gr.ids[xv], ch, str(P))
                    elif ch != ():
                        return False, (gr.ids[xv], ch, "expected empty")
                return True, "all characters match the KL oracle"
            _case(cases, "%s:kl-characters:%s" % (name, gr.ids[wv]), chk)
    if "A3" in types:
        def chk():
            g = ws.group("A3")
            s2 = g.element_of_word((1,))
            w = g.element_of_word((1, 0, 2, 1))
            P = kl_polynomial(g, s2, w)
            return P.coeffs == (1, 1), str(P)
        _case(cases, "A3:kl:1+q-pair", chk)
    return cases


# -- the two Hom restriction sequences (dimension identities) --------------------


def suite_ses(ws: Workspace, types=("A2",), seed=0, degree_range=range(-8, 9)):
    cases = []
    for name in types:
        bg = ws.bruhat(name)
        gr = bg.graph
        indec = [canonical_sheaf(gr, v, PERVERSE) for v in range(gr.nverts)]
        x_dims = {}
        closed_sets = [frozenset()] + [gr.down_set(v) for v in range(gr.nverts)]
        for Z in closed_sets:
            zname = "{" + ",".join(sorted(gr.ids[v] for v in Z)) + "}"
            U = [v for v in range(gr.nverts) if v not in Z]

            def chk(Z=Z, U=U):
                for a, E in enumerate(indec):
                    rE = restrict(E, Z)
                    for b, F in enumerate(indec):
                        try:
                            cF = corestrict(F, Z).sheaf if Z else None
                        except MomixError as exc:
                            return False, "corestrict: %s" % exc
                        for d in degree_range:
                            key = (a, b, d)
                            if key not in x_dims:
                                x_dims[key] = hom_dim(E, F, d)
                            full = x_dims[key]
                            u_dim = hom_dim(E, F, d, domain=U) if U else 0
                            i_star = hom_dim(rE, F, d)
                            if full != i_star + u_dim:
                                return False, ("*-identity", gr.ids[a], gr.ids[b], d,
                                               full, i_star, u_dim)
                            i_shriek = hom_dim(E, cF, d) if cF is not None else 0
                            if full != i_shriek + u_dim:
                                return False, ("!-identity", gr.ids[a], gr.ids[b], d,
                                               full, i_shriek, u_dim)
                return True, "both identities hold for all pairs and degrees"
            _case(cases, "%s:ses:Z=%s" % (name, zname), chk)
    return cases


# -- condition (V) ---------------------------------------------------------------


def suite_vcond(ws: Workspace, types=("A2", "B2"), seed=0):
    cases = []
    for name in types:
        def chk(name=name):
            ok, wit = check_condition_V(ws.bruhat(name).graph)
            return ok, "all costalks certified free" if ok else wit
        _case(cases, "%s:condition-V" % name, chk)

    def chk_witness():
        res = find_non_verma_witness()
        if res is None:
            return False, "no failure found in the catalog"
        g, vid = res
        return True, "failure at vertex %s of a %d-vertex graph with labels %s" % (
            vid, g.nverts, [str(l) for l in g.labels])
    _case(cases, "generic:non-V-witness", chk_witness)
    return cases


# -- Hom vanishing ----------------------------------------------------------------


def suite_vanishing(ws: Workspace, types=("A2",), seed=0, i_range=range(-4, 5),
                    degree_range=range(-8, 9)):
    cases = []
    for name in types:
        gr = ws.bruhat(name).graph
        deltas = {v: standard_complex(gr, v) for v in range(gr.nverts)}
        nablas = {v: costandard_complex(gr, v) for v in range(gr.nverts)}
        for xv in range(gr.nverts):
            for wv in range(gr.nverts):
                def chk(xv=xv, wv=wv):
                    C, D = deltas[xv], nablas[wv]
                    for i in i_range:
                        dims = khom(C, D, i, degree_range)
                        gens = forget_hom(C, D, i, degree_range)
                        expect_R = (xv == wv and i == 0)
                        for n in degree_range:
                            want = gr.ring.dim_piece(n) if expect_R else 0
                            if dims[n] != want:
                                return False, ("khom", i, n, dims[n], want)
                            wantg = 1 if (expect_R and n == 0) else 0
                            if gens[n] != wantg:
                                return False, ("forget", i, n, gens[n], wantg)
                    return True, "R-or-0 and k-or-0 as predicted"
                _case(cases, "%s:vanishing:%s,%s" % (name, gr.ids[xv], gr.ids[wv]), chk)
    return cases


# -- braid relations ----------------------------------------------------------------


def _braid_words(system, s, t):
    m = system.m[s][t]
    w1 = tuple((s, t)[k % 2] for k in range(m))
    w2 = tuple((t, s)[k % 2] for k in range(m))
    return w1, w2


def suite_braid(ws: Workspace, types=("A2", "B2"), seed=0):
    cases = []
    for name in types:
        ctx = ws.ctx(name)
        sys = ctx.bg.group.system
        pairs = [(s, t) for s in range(sys.nvars) for t in range(s + 1, sys.nvars)
                 if sys.m[s][t] >= 3]
        if not pairs:
            _case(cases, "%s:braid:none" % name, lambda: (True, "no braid pairs"))
            continue
        for s, t in pairs:
            def chk(s=s, t=t, ctx=ctx):
                w1, w2 = _braid_words(ctx.bg.group.system, s, t)
                v, data = is_homotopy_equiv(delta_letters(ctx, w1),
                                            delta_letters(ctx, w2))
                return v == "equiv", v
            _case(cases, "%s:braid:m=%d" % (name, sys.m[s][t]), chk)
    return cases


# -- Rouquier complexes are the standard objects --------------------------------------


def suite_rouquier_formula(ws: Workspace, types=("A2",), seed=0,
                           i_range=range(-2, 3), degree_range=range(-6, 7)):
    cases = []
    for name in types:
        ctx = ws.ctx(name)
        gr = ctx.graph
        for v in range(gr.nverts):
            def chk(v=v, ctx=ctx, gr=gr):
                word = ctx.bg.elements[v].word
                lhs = delta_letters(ctx, word)
                rhs = standard_complex(gr, v)
                v1, _ = is_homotopy_equiv(lhs, rhs)
                lhs2 = nabla_letters(ctx, word)
                rhs2 = costandard_complex(gr, v)
                v2, _ = is_homotopy_equiv(lhs2, rhs2)
                return v1 == "equiv" and v2 == "equiv", (v1, v2)
            _case(cases, "%s:std-rouquier:%s" % (name, gr.ids[v]), chk)
        Fs = {v: delta_letters(ctx, ctx.bg.elements[v].word) for v in range(gr.nverts)}
        Es = {v: nabla_letters(ctx, ctx.bg.elements[v].word) for v in range(gr.nverts)}
        for xv in range(gr.nverts):
            def chk(xv=xv):
                for wv in range(gr.nverts):
                    for i in i_range:
                        dims = khom(Fs[xv], Es[wv], i, degree_range)
                        expect_R = (xv == wv and i == 0)
                        for n in degree_range:
                            want = gr.ring.dim_piece(n) if expect_R else 0
                            if dims[n] != want:
                                return False, (gr.ids[wv], i, n, dims[n], want)
                return True, "dichotomy holds"
            _case(cases, "%s:rouquier-formula:%s" % (name, gr.ids[xv]), chk)
    return cases


# -- perversity ------------------------------------------------------------------------


def suite_perverse(ws: Workspace, types=("A2", "B2"), seed=0):
    cases = []
    for name in types:
        gr = ws.bruhat(name).graph
        for v in range(gr.nverts):
            def chk(v=v, gr=gr):
                rd = perversity_check(standard_complex(gr, v))
                rn = perversity_check(costandard_complex(gr, v))
                return rd.in_heart and rn.in_heart, \
                    ("delta", rd.leq0, rd.geq0, "nabla", rn.leq0, rn.geq0)
            _case(cases, "%s:perverse:%s" % (name, gr.ids[v]), chk)

        def chk_fail(name=name):
            ctx = ws.ctx(name)
            C = unit_complex(ctx).shift_c(1)
            r = perversity_check(C)
            return (r.leq0 and not r.geq0), ("leq0", r.leq0, "geq0", r.geq0)
        _case(cases, "%s:perverse:unit[1]-fails" % name, chk_fail)
    return cases


# -- convolution ------------------------------------------------------------------------


def suite_convolution(ws: Workspace, types=("A2",), seed=0):
    cases = []
    for name in types:
        ctx = ws.ctx(name)
        g = ctx.bg.group
        pairs = [(y, w) for y in g for w in g
                 if y.length and w.length and
                 g.mul(y, w).length == y.length + w.length]
        for y, w in pairs:
            def chk(y=y, w=w, ctx=ctx):
                v, _ = assoc_lengths(ctx, y.word, w.word)
                return v == "equiv", v
            _case(cases, "%s:assoc:%s*%s" % (name, y.word_str(g.system.gens),
                                             w.word_str(g.system.gens)), chk)
        for w in g:
            if not w.length:
                continue
            def chk(w=w, ctx=ctx):
                ok, labels = inverse_pair(ctx, w.word)
                return ok, labels
            _case(cases, "%s:inverse-pair:%s" % (name, w.word_str(g.system.gens)), chk)
        for x in g:
            for s in range(g.system.nvars):
                xs = g.right(x, s)
                if xs.length <= x.length:
                    continue
                def chk(x=x, s=s, ctx=ctx):
                    v, _ = triangle_check(ctx, x.word, s)
                    return v == "equiv", v
                _case(cases, "%s:triangle:%s*%s" % (name, x.word_str(g.system.gens),
                                                    g.system.gens[s]), chk)
        # seeded one-sided t-exactness spot checks for single letters
        rng = random.Random(seed)
        els = [w for w in g if w.length]
        for trial in range(3):
            w = rng.choice(els)
            s = rng.randrange(g.system.nvars)
            tate_n = rng.randrange(-1, 2)

            def chk(w=w, s=s, tate_n=tate_n, ctx=ctx):
                C = delta_letters(ctx, w.word)
                for _ in range(abs(tate_n)):
                    C = C.tate() if tate_n > 0 else C.twist(1).shift_c(-1)
                FC, _, _, _ = minimize(letter_F(ctx, s, C), witness=False)
                EC, _, _, _ = minimize(letter_E(ctx, s, C), witness=False)
                rf = perversity_check(FC)
                re_ = perversity_check(EC)
                return rf.geq0 and re_.leq0, ("F.geq0", rf.geq0, "E.leq0", re_.leq0)
            _case(cases, "%s:t-exactness:seeded-%d" % (name, trial), chk)
    return cases


# -- Ringel duality ------------------------------------------------------------------------


def suite_ringel(ws: Workspace, types=("A2",), seed=0):
    cases = []
    for name in types:
        ctx = ws.ctx(name)
        g = ctx.bg.group
        for w in g:
            def chk(w=w, ctx=ctx):
                v, _ = ringel_check(ctx, w.word)
                return v == "equiv", v
            _case(cases, "%s:ringel:%s" % (name, w.word_str(g.system.gens)), chk)
    return cases


# -- stalk/costalk degree conditions ----------------------------------------------------


def suite_soergel(ws: Workspace, types=("A2", "B2"), seed=0):
    cases = []
    for name in types:
        gr = ws.bruhat(name).graph
        for v in range(gr.nverts):
            def chk(v=v, gr=gr):
                ver = soergel_degree_conditions(gr, v)
                bad = {k: rec for k, rec in ver.items() if not rec["ok"]}
                return not bad, bad or "degree conditions hold"
            _case(cases, "%s:soergel:%s" % (name, gr.ids[v]), chk)
    return cases


SUITES = {
    "axioms": suite_axioms,
    "ses": suite_ses,
    "vcond": suite_vcond,
    "kl": suite_kl,
    "vanishing": suite_vanishing,
    "braid": suite_braid,
    "rouquier-formula": suite_rouquier_formula,
    "perverse": suite_perverse,
    "convolution": suite_convolution,
    "ringel": suite_ringel,
    "soergel": suite_soergel,
}

DEFAULT_TYPES = {
    "axioms": ("A1", "A2", "B2", "A3"),
    "ses": ("A2",),
    "vcond": ("A2", "B2"),
    "kl": ("A2", "B2", "A3"),
    "vanishing": ("A2",),
    "braid": ("A2", "B2"),
    "rouquier-formula": ("A2",),
    "perverse": ("A2", "B2"),
    "convolution": ("A2",),
    "ringel": ("A2",),
    "soergel": ("A2", "B2"),
}


def run_suite(ws: Workspace, suite: str, types=None, seed: int = 0):
    if suite not in SUITES:
        raise MomixError("unknown suite %r (have %s)" % (suite, ", ".join(SUITE_NAMES)))
    ts = tuple(types) if types else DEFAULT_TYPES[suite]
    return SUITES[suite](ws, types=ts, seed=seed)

"""JSON schemas for graphs, sheaves and complexes, CSV exports, and the
plain-text pretty printer.  Dumps are canonical (sorted keys, canonical
polynomial strings) so that identical data produces identical bytes and
load-then-dump is the identity on files we wrote.
"""

from __future__ import annotations

import json

from .errors import ValidationError
from .gradedmod import FreeModule, ModMap
from .graph import MomentGraph
from .poly import Poly, PolyRing, parse_poly
from .scalars import Field
from .sheaf import Sheaf
from .complexes import Complex, Summand, Term
from .bmp import canonical_sheaf
from .sheaf import SheafMorphism


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


# -- graphs ------------------------------------------------------------------


def graph_to_json(g: MomentGraph) -> dict:
    return {
        "field": g.ring.field.to_json(),
        "vars": list(g.ring.names),
        "vertices": [{"id": g.ids[v], "d": g.d[v], "order_rank": v}
                     for v in range(g.nverts)],
        "order": sorted([g.ids[u], g.ids[v]] for (u, v) in g.less),
        "edges": [{"u": g.ids[u], "v": g.ids[v], "label": str(g.labels[k])}
                  for k, (u, v) in enumerate(g.edges)],
    }


def graph_from_json(obj) -> MomentGraph:
    field = Field.from_json(obj["field"])
    ring = PolyRing(field, len(obj["vars"]), obj["vars"])
    verts = sorted(obj["vertices"], key=lambda r: r["order_rank"])
    ids = [r["id"] for r in verts]
    dfun = [r["d"] for r in verts]
    index = {vid: i for i, vid in enumerate(ids)}
    less = [(index[u], index[v]) for u, v in obj["order"]]
    edges = [(index[e["u"]], index[e["v"]]) for e in obj["edges"]]
    labels = [parse_poly(ring, e["label"]) for e in obj["edges"]]
    return MomentGraph(ring, ids, dfun, less, edges, labels)


# -- sheaves -----------------------------------------------------------------


def _matrix_to_json(mm: ModMap):
    return [[str(p) for p in row] for row in mm.entries]


def sheaf_to_json(F: Sheaf, normalization: str | None = None) -> dict:
    g = F.graph
    out = {
        "graph": graph_to_json(g),
        "stalks": {g.ids[v]: list(F.stalks[v].shifts) for v in range(g.nverts)
                   if F.stalks[v].rank},
        "edges": [{"u": g.ids[u], "v": g.ids[v],
                   "shifts": list(F.edge_mods[k].shifts),
                   "label": str(g.labels[k])}
                  for k, (u, v) in enumerate(g.edges) if F.edge_mods[k].rank],
        "rho": [{"vertex": g.ids[w], "u": g.ids[u], "v": g.ids[v],
                 "matrix": _matrix_to_json(F.rho[(w, k)])}
                for k, (u, v) in enumerate(g.edges) if F.edge_mods[k].rank
                for w in (u, v) if F.stalks[w].rank],
    }
    if normalization:
        out["normalization"] = normalization
    return out


def sheaf_from_json(obj) -> Sheaf:
    g = graph_from_json(obj["graph"])
    ring = g.ring
    stalks = [FreeModule(ring, tuple(obj["stalks"].get(g.ids[v], ())))
              for v in range(g.nverts)]
    edge_mods = []
    by_pair = {}
    for e in obj["edges"]:
        by_pair[(e["u"], e["v"])] = e
    for k, (u, v) in enumerate(g.edges):
        rec = by_pair.get((g.ids[u], g.ids[v])) or by_pair.get((g.ids[v], g.ids[u]))
        if rec is None:
            edge_mods.append(FreeModule(ring, ()))
        else:
            edge_mods.append(FreeModule(ring, tuple(rec["shifts"]), g.labels[k]))
    rho = {}
    for rec in obj["rho"]:
        w = g.index(rec["vertex"])
        k = g.edge_key(g.index(rec["u"]), g.index(rec["v"]))
        entries = [[parse_poly(ring, s) for s in row] for row in rec["matrix"]]
        rho[(w, k)] = ModMap(stalks[w], edge_mods[k], 0, entries)
    return Sheaf(g, stalks, edge_mods, rho, check=True)


# -- complexes ----------------------------------------------------------------


def complex_to_json(C: Complex) -> dict:
    g = C.graph
    terms = {}
    for i in C.degrees():
        counter = {}
        for s in C.term(i).summands:
            counter[s.label] = counter.get(s.label, 0) + 1
        terms[str(i)] = [{"vertex": g.ids[v], "shift": n, "mult": m}
                         for (v, n), m in sorted(counter.items())]
    diffs = []
    for i in C.degrees():
        if i + 1 not in C.terms:
            continue
        d = C.diff(i)
        diffs.append({
            "degree": i,
            "vertex_maps": {g.ids[v]: _matrix_to_json(d.vmaps[v])
                            for v in range(g.nverts)
                            if d.vmaps[v].entries and any(d.vmaps[v].entries)
                            and d.vmaps[v].src.rank and d.vmaps[v].tgt.rank},
            "edge_maps": [{"u": g.ids[u], "v": g.ids[v],
                           "matrix": _matrix_to_json(d.emaps[k])}
                          for k, (u, v) in enumerate(g.edges)
                          if d.emaps[k].src.rank and d.emaps[k].tgt.rank],
        })
    return {"graph": graph_to_json(g), "normalization": C.normalization,
            "terms": terms, "differentials": diffs}


def complex_from_json(obj, graph: MomentGraph | None = None) -> Complex:
    g = graph if graph is not None else graph_from_json(obj["graph"])
    norm = obj["normalization"]
    terms = {}
    for deg_s, recs in sorted(obj["terms"].items(), key=lambda t: int(t[0])):
        ss = []
        for rec in recs:
            v = g.index(rec["vertex"])
            sheaf = canonical_sheaf(g, v, norm).twist(rec["shift"])
            for _ in range(rec["mult"]):
                ss.append(Summand((v, rec["shift"]), sheaf))
        if ss:
            terms[int(deg_s)] = Term(g, ss)
    diffs = {}
    for rec in obj["differentials"]:
        i = rec["degree"]
        if i not in terms or i + 1 not in terms:
            continue
        src, tgt = terms[i].total, terms[i + 1].total
        vmaps = []
        for v in range(g.nverts):
            mats = rec["vertex_maps"].get(g.ids[v])
            if mats is None:
                vmaps.append(ModMap.zero(src.stalks[v], tgt.stalks[v]))
            else:
                vmaps.append(ModMap(src.stalks[v], tgt.stalks[v], 0,
                                    [[parse_poly(g.ring, s) for s in row]
                                     for row in mats]))
        emaps = [None] * g.nedges
        by_pair = {(r["u"], r["v"]): r["matrix"] for r in rec["edge_maps"]}
        for k, (u, v) in enumerate(g.edges):
            mats = by_pair.get((g.ids[u], g.ids[v]))
            if mats is None:
                emaps[k] = ModMap.zero(src.edge_mods[k], tgt.edge_mods[k])
            else:
                emaps[k] = ModMap(src.edge_mods[k], tgt.edge_mods[k], 0,
                                  [[parse_poly(g.ring, s) for s in row]
                                   for row in mats])
        diffs[i] = SheafMorphism(src, tgt, 0, vmaps, emaps, check=True)
    return Complex(g, norm, terms, diffs, check=True)


# -- CSV and pretty printing ---------------------------------------------------


def stalk_character_csv(graph: MomentGraph, F: Sheaf, offset: int = 0) -> str:
    """CSV of stalk Hilbert numerators: vertex, generator degrees, and the
    numerator in q under the dictionary q^k = character degree 2k.

    offset shifts generator degrees into the classification dictionary
    (pass the top dimension for perversely normalized sheaves).
    """
    lines = ["vertex,generator_degrees,hilbert_numerator_q"]
    for v in range(graph.nverts):
        degs = sorted(-n for n in F.stalks[v].shifts)
        counter = {}
        for dg in degs:
            counter[dg + offset] = counter.get(dg + offset, 0) + 1
        bits = []
        for dg in sorted(counter):
            c = counter[dg]
            if dg < 0 or dg % 2:
                q = "t^%d" % dg
            else:
                q = "1" if dg == 0 else ("q" if dg == 2 else "q^%d" % (dg // 2))
            bits.append(q if c == 1 else "%d*%s" % (c, q))
        poly = " + ".join(bits) if bits else "0"
        lines.append("%s,%s,%s" % (graph.ids[v], " ".join(str(d) for d in degs), poly))
    return "\n".join(lines) + "\n"


def hom_table_csv(dims: dict) -> str:
    """CSV from {(i, n): dim}."""
    i_vals = sorted({i for (i, _n) in dims})
    n_vals = sorted({n for (_i, n) in dims})
    lines = ["i\\degree," + ",".join(str(n) for n in n_vals)]
    for i in i_vals:
        lines.append(str(i) + "," + ",".join(str(dims.get((i, n), 0)) for n in n_vals))
    return "\n".join(lines) + "\n"


def pretty_sheaf(F: Sheaf) -> str:
    """Vertical picture: vertices in decreasing dimension with their stalks,
    edge modules in between."""
    g = F.graph
    def fmt_mod(m):
        if m.rank == 0:
            return "0"
        base = "R" if m.alpha is None else "(R/%s)" % m.alpha
        return " + ".join("%s{%d}" % (base, n) for n in m.shifts)
    lines = []
    order = sorted(range(g.nverts), key=lambda v: (-g.d[v], g.ids[v]))
    for v in order:
        lines.append("[%s]  %s" % (g.ids[v], fmt_mod(F.stalks[v])))
        for k in g.down_edges(v):
            u, w = g.edges[k]
            if F.edge_mods[k].rank:
                lines.append("   |  %s --- %s :  %s" %
                             (g.ids[u], g.ids[w], fmt_mod(F.edge_mods[k])))
    return "\n".join(lines) + "\n"

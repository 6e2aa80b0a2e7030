"""Ordered moment graphs over an exact polynomial ring.

A graph stores its full strict order relation, a dimension function, and
degree-2 labels on edges between comparable vertices.  Sub-moment graphs
are handled through vertex subsets: sheaf data lives on the full graph
with zero modules outside the region of interest.
"""

from __future__ import annotations

from .errors import NotClosed, NotOpen, ValidationError
from .poly import Poly, PolyRing


class MomentGraph:
    def __init__(self, ring: PolyRing, ids, dfun, less_pairs, edges, labels):
        self.ring = ring
        self.ids = tuple(ids)
        self.d = tuple(dfun)
        n = len(self.ids)
        if len(set(self.ids)) != n or len(self.d) != n:
            raise ValidationError("vertex ids must be distinct and match d")
        self._index = {v: i for i, v in enumerate(self.ids)}
        less = set()
        for u, v in less_pairs:
            if u == v:
                raise ValidationError("strict order cannot be reflexive")
            less.add((u, v))
        for u, v in less:
            if (v, u) in less:
                raise ValidationError("order is not antisymmetric")
        for u, v in list(less):
            for w in range(n):
                if (v, w) in less and (u, w) not in less:
                    raise ValidationError("order is not transitive")
        self.less = frozenset(less)
        norm_edges = []
        for (u, v), lab in zip(edges, labels):
            if (u, v) in self.less:
                lo, hi = u, v
            elif (v, u) in self.less:
                lo, hi = v, u
            else:
                raise ValidationError("edge %s-%s joins incomparable vertices"
                                      % (self.ids[u], self.ids[v]))
            if lab.is_zero() or lab.internal_degree() != 2:
                raise ValidationError("edge labels must be nonzero linear forms")
            norm_edges.append(((lo, hi), lab))
        norm_edges.sort(key=lambda t: t[0])
        self.edges = tuple(e for e, _ in norm_edges)
        self.labels = tuple(l for _, l in norm_edges)
        if len(set(self.edges)) != len(self.edges):
            raise ValidationError("at most one edge per vertex pair")
        self._edge_index = {e: k for k, e in enumerate(self.edges)}
        self._up = {v: tuple(k for k, (lo, hi) in enumerate(self.edges) if lo == v)
                    for v in range(n)}
        self._down = {v: tuple(k for k, (lo, hi) in enumerate(self.edges) if hi == v)
                      for v in range(n)}

    # -- basic queries ------------------------------------------------------

    @property
    def nverts(self):
        return len(self.ids)

    @property
    def nedges(self):
        return len(self.edges)

    def index(self, vid: str) -> int:
        if vid not in self._index:
            raise ValidationError("unknown vertex %r" % vid)
        return self._index[vid]

    def lt(self, u: int, v: int) -> bool:
        return (u, v) in self.less

    def leq(self, u: int, v: int) -> bool:
        return u == v or (u, v) in self.less

    def down_set(self, v: int) -> frozenset:
        return frozenset([v] + [u for u in range(self.nverts) if self.lt(u, v)])

    def strict_up_set(self, v: int) -> frozenset:
        return frozenset(u for u in range(self.nverts) if self.lt(v, u))

    def up_edges(self, v: int):
        """Edges v --- y with v < y (the edge set at the delta-boundary of v)."""
        return self._up[v]

    def down_edges(self, v: int):
        return self._down[v]

    def edge_key(self, u: int, v: int):
        e = (u, v) if (u, v) in self._edge_index else (v, u)
        return self._edge_index.get(e)

    def is_open(self, subset) -> bool:
        s = set(subset)
        return all(v in s for u in s for v in range(self.nverts) if self.lt(u, v))

    def is_closed(self, subset) -> bool:
        s = set(subset)
        return all(u in s for v in s for u in range(self.nverts) if self.lt(u, v))

    def require_closed(self, subset):
        if not self.is_closed(subset):
            raise NotClosed("subset %s is not downward closed"
                            % sorted(self.ids[v] for v in subset))

    def require_open(self, subset):
        if not self.is_open(subset):
            raise NotOpen("subset %s is not upward closed"
                          % sorted(self.ids[v] for v in subset))

    def internal_edges(self, subset):
        s = set(subset)
        return tuple(k for k, (u, v) in enumerate(self.edges) if u in s and v in s)

    def all_vertices(self) -> frozenset:
        return frozenset(range(self.nverts))

    def __repr__(self):
        return "MomentGraph(%d vertices, %d edges)" % (self.nverts, self.nedges)


class GraphMorphism:
    """Vertex map between moment graphs over the same ring; every edge
    either collapses or maps to an edge with the same label."""

    def __init__(self, src: MomentGraph, tgt: MomentGraph, vmap):
        if src.ring != tgt.ring:
            raise ValidationError("graph morphism needs a common realization ring")
        self.src = src
        self.tgt = tgt
        self.vmap = tuple(vmap)
        if len(self.vmap) != src.nverts:
            raise ValidationError("vertex map has wrong length")
        for k, (u, v) in enumerate(src.edges):
            fu, fv = self.vmap[u], self.vmap[v]
            if fu == fv:
                continue
            ek = tgt.edge_key(fu, fv)
            if ek is None or tgt.labels[ek] != src.labels[k]:
                raise ValidationError(
                    "edge %s-%s neither collapses nor maps to an equal-labeled edge"
                    % (src.ids[u], src.ids[v]))

    def collapsed(self, edge_idx: int) -> bool:
        u, v = self.src.edges[edge_idx]
        return self.vmap[u] == self.vmap[v]

"""The 2-Mapper complex: the 2-skeleton of the nerve of a cluster cover."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .clustering import ClusterCover, ClusterNode
from .persistence import betti_numbers, canonical


@dataclass
class TwoMapperComplex:
    """Vertices are cluster ids, simplices are sorted id tuples."""

    vertices: dict[int, ClusterNode | None] = field(default_factory=dict)
    edges: set[tuple[int, int]] = field(default_factory=set)
    triangles: set[tuple[int, int, int]] = field(default_factory=set)

    def simplices(self) -> list[tuple[int, ...]]:
        return [(v,) for v in sorted(self.vertices)] + sorted(self.edges) + sorted(self.triangles)

    def add(self, simplex, node: ClusterNode | None = None) -> None:
        """Insert a simplex together with all of its faces."""
        s = canonical(simplex)
        for v in s:
            self.vertices.setdefault(v, node if len(s) == 1 else None)
        for e in itertools.combinations(s, 2):
            self.edges.add(e)
        if len(s) == 3:
            self.triangles.add(s)

    def check_closed(self) -> None:
        for e in self.edges:
            assert len(set(e)) == 2 and all(v in self.vertices for v in e), e
        for t in self.triangles:
            assert len(set(t)) == 3, t
            for e in itertools.combinations(t, 2):
                assert e in self.edges, (t, e)

    def copy(self) -> "TwoMapperComplex":
        return TwoMapperComplex(dict(self.vertices), set(self.edges), set(self.triangles))

    def neighbours(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def to_dict(self) -> dict:
        verts = []
        for v in sorted(self.vertices):
            node = self.vertices[v]
            if node is None:
                verts.append({"id": v})
            else:
                verts.append({"id": v, "index": list(node.cover_index), "local": node.local_index, "size": node.size})
        return {
            "vertices": verts,
            "edges": [list(e) for e in sorted(self.edges)],
            "triangles": [list(t) for t in sorted(self.triangles)],
        }

    @property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.triangles)


def build_two_mapper(cc: ClusterCover, include_noise: bool = False) -> TwoMapperComplex:
    """Vertices per cluster, an edge per pairwise overlap, a triangle per triple overlap."""
    nodes = [n for n in cc.nodes if include_noise or not n.is_noise]
    cx = TwoMapperComplex({n.global_id: n for n in nodes})
    holders: dict[int, list[int]] = {}
    for n in nodes:
        for p in n.members:
            holders.setdefault(p, []).append(n.global_id)
    for ids in holders.values():
        if len(ids) > 1:
            cx.edges.update(itertools.combinations(sorted(ids), 2))
    adj = cx.neighbours()
    members = {n.global_id: n.members for n in nodes}
    for a, b in cx.edges:
        for c in adj[a] & adj[b]:
            if c > b and members[a] & members[b] & members[c]:
                cx.triangles.add((a, b, c))
    return cx


def one_skeleton(cx: TwoMapperComplex) -> TwoMapperComplex:
    """The classical Mapper graph: drop the triangles."""
    return TwoMapperComplex(dict(cx.vertices), set(cx.edges), set())


def betti(cx: TwoMapperComplex, up_to_dim: int = 2) -> list[int]:
    return betti_numbers(cx.simplices(), up_to_dim)

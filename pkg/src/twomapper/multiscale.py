"""Multiscale 2-Mapper: align 2-Mapper complexes along a tower and build a filtration.

Consecutive stages are matched by best Jaccard overlap between clusters of
the same cover set. When several clusters of stage ``i`` fall into one
cluster ``m`` of stage ``i + 1`` (a collapse), the largest keeps its
identity in ``m`` and every other one is put back into stage ``i + 1`` as a
vertex joined to ``m``, together with cones that reproduce its old
neighbourhood. Vertex ids therefore persist from stage to stage and the
stages nest, which makes them a filtration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .clustering import ClusterNode, DbscanParams, cluster_cover
from .cover import Tower
from .errors import TwoMapperError, UnmatchedNodeError
from .nerve import TwoMapperComplex, build_two_mapper
from .persistence import FilteredComplex
from .pointcloud import LensImage, PointCloud


@dataclass
class CollapseRecord:
    kept: int
    reinserted: list[int]
    target: int
    simplices: list[tuple[int, ...]] = field(default_factory=list)


@dataclass
class AlignmentMap:
    """How stage ``stage`` maps into stage ``stage + 1``.

    ``phi`` sends stage ids to stage ``stage + 1`` ids. ``relabel`` sends
    the raw cluster ids of the new stage to their persistent ids.
    """

    stage: int
    phi: dict[int, int]
    relabel: dict[int, int]
    collapse_records: list[CollapseRecord] = field(default_factory=list)
    double_collapses: list[tuple[int, int]] = field(default_factory=list)
    fresh: list[int] = field(default_factory=list)
    pair_evaluations: int = 0
    carried: int = 0
    unrepaired: TwoMapperComplex | None = None

    @property
    def reinserted(self) -> list[int]:
        return [n for rec in self.collapse_records for n in rec.reinserted]

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "phi": {str(k): v for k, v in sorted(self.phi.items())},
            "collapses": [
                {"kept": r.kept, "target": r.target, "reinserted": r.reinserted, "simplices": [list(s) for s in r.simplices]}
                for r in self.collapse_records
            ],
            "double_collapses": [list(p) for p in self.double_collapses],
            "fresh": self.fresh,
        }


def _by_index(nodes) -> dict[tuple, list[ClusterNode]]:
    out: dict[tuple, list[ClusterNode]] = {}
    for n in nodes:
        out.setdefault(n.cover_index, []).append(n)
    return out


def jaccard_matrix(source: Sequence[ClusterNode], target: Sequence[ClusterNode]):
    """Sparse Jaccard overlaps between nodes sharing a cover index.

    Returns ``(entries, evaluations)`` where ``entries[n][m]`` is the
    Jaccard index of nodes ``n`` and ``m`` (only nonzero values are kept)
    and ``evaluations`` counts the same-index pairs examined.
    """
    groups = _by_index(target)
    entries: dict[int, dict[int, float]] = {}
    evaluations = 0
    for n in source:
        row = entries.setdefault(n.global_id, {})
        for m in groups.get(n.cover_index, ()):
            evaluations += 1
            inter = len(n.members & m.members)
            if inter:
                row[m.global_id] = inter / (len(n.members) + len(m.members) - inter)
    return entries, evaluations


def _link_edges(cx: TwoMapperComplex, v: int) -> list[tuple[int, int]]:
    return [tuple(x for x in t if x != v) for t in cx.triangles if v in t]


def align(
    mi: TwoMapperComplex,
    mj: TwoMapperComplex,
    next_id: int | None = None,
    stage: int = 0,
    pair_rule: str = "link",
) -> tuple[AlignmentMap, TwoMapperComplex]:
    """Align stage ``mi`` (persistent ids) with the raw next stage ``mj``.

    ``mj`` is the 2-Mapper complex of the next scale with its own cluster
    ids. Returns the alignment and the repaired next stage expressed in
    persistent ids. Both complexes must carry their ``ClusterNode`` on every
    vertex.

    ``pair_rule`` chooses which vertex pairs ``(o1, o2)`` around a
    reinserted vertex ``n`` receive a triangle ``(o1, o2, n)``: ``"link"``
    takes the edges of the link of ``n`` in ``mi`` (pairs already forming a
    triangle with ``n``); ``"edge"`` takes every edge of ``mi`` whose two
    ends are both adjacent to ``n``.
    """
    if pair_rule not in ("link", "edge"):
        raise ValueError(f"unknown pair rule {pair_rule!r}")
    src_nodes = [mi.vertices[v] for v in sorted(mi.vertices)]
    dst_nodes = [mj.vertices[v] for v in sorted(mj.vertices)]
    if any(n is None for n in src_nodes + dst_nodes):
        raise TwoMapperError("every vertex needs its cluster node for alignment")
    if next_id is None:
        next_id = max(mi.vertices, default=-1) + 1
    entries, evaluations = jaccard_matrix(src_nodes, dst_nodes)

    phi_raw: dict[int, int] = {}
    for n in src_nodes:
        row = entries[n.global_id]
        if not row:
            raise UnmatchedNodeError(
                f"stage {stage}: cluster {n.global_id} at index {n.cover_index} overlaps nothing in the next stage",
                node=n.global_id,
                stage=stage,
            )
        best = max(row.values())
        phi_raw[n.global_id] = min(m for m, j in row.items() if j == best)

    fibres: dict[int, list[int]] = {}
    for n, m in phi_raw.items():
        fibres.setdefault(m, []).append(n)

    relabel: dict[int, int] = {}
    kept_of: dict[int, int] = {}
    collapsed: dict[int, int] = {}
    for m, fibre in sorted(fibres.items()):
        biggest = max(mi.vertices[n].size for n in fibre)
        keep = min(n for n in fibre if mi.vertices[n].size == biggest)
        relabel[m] = keep
        kept_of[m] = keep
        for n in fibre:
            if n != keep:
                collapsed[n] = m
    fresh = []
    for m in sorted(mj.vertices):
        if m not in relabel:
            relabel[m] = next_id
            fresh.append(next_id)
            next_id += 1

    out = TwoMapperComplex()
    for m, node in mj.vertices.items():
        out.vertices[relabel[m]] = ClusterNode(relabel[m], node.cover_index, node.local_index, node.members)
    for a, b in mj.edges:
        out.add((relabel[a], relabel[b]))
    for t in mj.triangles:
        out.add(tuple(relabel[v] for v in t))
    unrepaired = out.copy()

    adjacency = mi.neighbours()
    records: dict[int, CollapseRecord] = {}
    for n, m in sorted(collapsed.items()):
        target = relabel[m]
        rec = records.setdefault(m, CollapseRecord(kept_of[m], [], target))
        rec.reinserted.append(n)
        out.vertices[n] = mi.vertices[n]
        added = [(n, target)]
        added += [(o, n, target) for o in sorted(adjacency[n])]
        if pair_rule == "link":
            pairs = _link_edges(mi, n)
        else:
            nb = adjacency[n]
            pairs = [e for e in mi.edges if e[0] in nb and e[1] in nb]
        added += [(o1, o2, n) for o1, o2 in sorted(pairs)]
        # a reinserted vertex may already be joined to its own target
        added = [s for s in added if len(set(s)) == len(s)]
        for s in added:
            out.add(s)
        rec.simplices.extend(tuple(sorted(s)) for s in added)

    doubles = []
    for a, b in sorted(mi.edges):
        if a in collapsed and b in collapsed:
            ta, tb = relabel[collapsed[a]], relabel[collapsed[b]]
            doubles.append((a, b))
            for s in ((ta, tb, a), (ta, tb, b)):
                if len(set(s)) == 3:
                    out.add(s)
                    records[collapsed[a]].simplices.append(tuple(sorted(s)))

    phi = {n: (n if n in collapsed else relabel[m]) for n, m in phi_raw.items()}
    amap = AlignmentMap(
        stage=stage,
        phi=phi,
        relabel=relabel,
        collapse_records=[records[m] for m in sorted(records)],
        double_collapses=doubles,
        fresh=fresh,
        pair_evaluations=evaluations,
        unrepaired=unrepaired,
    )
    return amap, out


@dataclass
class MultiscaleResult:
    scales: list[float]
    filtered: FilteredComplex
    stages: list[TwoMapperComplex]
    alignments: list[AlignmentMap]
    registry: dict[int, dict]
    node_counts: list[int] = field(default_factory=list)
    seconds: float = 0.0

    def stage_slice(self, t: int) -> set[tuple[int, ...]]:
        return self.filtered.sublevel(self.scales[t])

    def to_dict(self) -> dict:
        return {
            "scales": self.scales,
            "filtration": self.filtered.to_list(),
            "stages": [cx.to_dict() for cx in self.stages],
            "alignments": [a.to_dict() for a in self.alignments],
            "registry": {str(k): v for k, v in sorted(self.registry.items())},
        }


def build_multiscale(
    cloud: PointCloud,
    image: LensImage,
    tower: Tower,
    params: DbscanParams,
    threads: int = 1,
    pair_rule: str = "link",
) -> MultiscaleResult:
    """Cluster every tower level, align consecutive stages and assemble the filtration.

    Noise is dropped. Birth values are the tower's scales.
    """
    start = time.perf_counter()
    scales = tower.scales
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise TwoMapperError("tower scales must be strictly increasing")
    filtered = FilteredComplex()
    stages: list[TwoMapperComplex] = []
    alignments: list[AlignmentMap] = []
    registry: dict[int, dict] = {}
    node_counts = []
    next_id = 0
    current = None
    for t, level in enumerate(tower.levels):
        cc = cluster_cover(cloud, image, level, params, threads=threads)
        raw = build_two_mapper(cc)
        node_counts.append(len(raw.vertices))
        if current is None:
            current = raw
            for v, node in raw.vertices.items():
                registry[v] = {"first_stage": 0, "origin": "root", "index": list(node.cover_index)}
            next_id = max(raw.vertices, default=-1) + 1
        else:
            try:
                amap, repaired = align(current, raw, next_id, stage=t - 1, pair_rule=pair_rule)
            except TwoMapperError as exc:
                raise type(exc)(f"aligning stages {t - 1} and {t}: {exc}") from exc
            for v in amap.fresh:
                registry[v] = {"first_stage": t, "origin": "fresh", "index": list(repaired.vertices[v].cover_index)}
            for rec in amap.collapse_records:
                for n in rec.reinserted:
                    registry[n].setdefault("collapsed_into", []).append({"stage": t, "target": rec.target})
            next_id = max(next_id - 1, *repaired.vertices) + 1
            carried = 0
            for s in current.simplices():
                if len(s) == 1:
                    if s[0] not in repaired.vertices:
                        repaired.vertices[s[0]] = current.vertices[s[0]]
                        carried += 1
                elif (s not in repaired.edges) and (s not in repaired.triangles):
                    repaired.add(s)
                    carried += 1
            amap.carried = carried
            alignments.append(amap)
            current = repaired
        current.check_closed()
        for s in current.simplices():
            filtered.insert(s, scales[t])
        stages.append(current)
    filtered.check_monotone()
    return MultiscaleResult(
        scales=list(scales),
        filtered=filtered,
        stages=stages,
        alignments=alignments,
        registry=registry,
        node_counts=node_counts,
        seconds=time.perf_counter() - start,
    )


@dataclass
class ComplexityReport:
    node_counts: list[int]
    pair_evaluations: list[int]
    seconds: float

    @property
    def total_evaluations(self) -> int:
        return sum(self.pair_evaluations)

    @property
    def bound(self) -> int:
        """``(n - 1) * max_N^2`` for ``n`` stages."""
        if not self.node_counts:
            return 0
        return (len(self.node_counts) - 1) * max(self.node_counts) ** 2

    @property
    def within_bound(self) -> bool:
        return self.total_evaluations <= self.bound


def complexity_probe(result: MultiscaleResult) -> ComplexityReport:
    """Count Jaccard pair evaluations against the ``(n - 1) N^2`` bound.

    Node counts here include vertices put back after collapses, since those
    take part in the next alignment.
    """
    counts = [len(cx.vertices) for cx in result.stages]
    report = ComplexityReport(counts, [a.pair_evaluations for a in result.alignments], result.seconds)
    if not report.within_bound:
        raise AssertionError(f"{report.total_evaluations} pair evaluations exceed the bound {report.bound}")
    return report

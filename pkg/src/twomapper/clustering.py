"""DBSCAN on cover-set preimages, cluster covers and the maps between them."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .cover import GoodCoverReport, Tower, TowerLevel, level_for_scale, box_contains_any, sample_subsets
from .errors import ContainmentViolationError, ParameterError
from .pointcloud import LensImage, PointCloud, diameter

NOISE = -1


@dataclass(frozen=True)
class DbscanParams:
    """``radius`` is the neighbourhood radius; a point is core when at least
    ``min_pts`` points (itself included) lie within it."""

    radius: float
    min_pts: int = 2

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"DBSCAN radius must be positive, got {self.radius}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 1:
            raise ParameterError(f"min_pts must be a positive integer, got {self.min_pts}")
        if self.min_pts > 3:
            warnings.warn(
                f"min_pts={self.min_pts}: free border points are possible and cluster maps may not exist",
                stacklevel=3,
            )


def _radius_graph(points: np.ndarray, radius: float):
    """Symmetric CSR adjacency of pairs at distance at most ``radius`` (no self loops)."""
    pairs = cKDTree(points).query_pairs(radius, output_type="ndarray")
    n = len(points)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)).tocsr()


def _labels_from_graph(graph, min_pts: int):
    """Core mask, core components and final labels for one neighbour graph."""
    counts = np.diff(graph.indptr) + 1
    core = counts >= min_pts
    raw = np.full(graph.shape[0], NOISE)
    if core.any():
        _, comp = connected_components(graph[core][:, core], directed=False)
        raw[core] = comp
    for i in np.flatnonzero(~core):
        nbrs = graph.indices[graph.indptr[i] : graph.indptr[i + 1]]
        nbrs = nbrs[core[nbrs]]
        if len(nbrs):
            raw[i] = raw[nbrs.min()]
    labels = np.full(len(raw), NOISE)
    clustered = raw != NOISE
    if clustered.any():
        # renumber clusters by their smallest member
        values, first = np.unique(raw[clustered], return_index=True)
        rank = np.empty(len(values), dtype=int)
        rank[np.argsort(first)] = np.arange(len(values))
        labels[clustered] = rank[np.searchsorted(values, raw[clustered])]
    return core, raw, labels


def dbscan(points, params: DbscanParams) -> np.ndarray:
    """Label rows of ``points`` with cluster numbers, ``-1`` for noise.

    Border points join the cluster of their lowest-index core neighbour.
    Clusters are numbered by their smallest member index.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        raise ParameterError("dbscan needs at least one point")
    return _labels_from_graph(_radius_graph(points, params.radius), params.min_pts)[2]


def detect_free_border_points(points, params: DbscanParams) -> set[int]:
    """Border points within reach of core points from two or more clusters.

    Such a point's cluster depends on processing order. They need a
    non-core point with core neighbours in two clusters, so at least four
    points in its neighbourhood: none exist for ``min_pts <= 3``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    graph = _radius_graph(points, params.radius)
    core, raw, _ = _labels_from_graph(graph, params.min_pts)
    free = set()
    for i in np.flatnonzero(~core):
        nbrs = graph.indices[graph.indptr[i] : graph.indptr[i + 1]]
        if len(set(raw[nbrs[core[nbrs]]].tolist())) >= 2:
            free.add(int(i))
    return free


@dataclass(frozen=True)
class ClusterNode:
    global_id: int
    cover_index: tuple[int, ...]
    local_index: int
    members: frozenset
    is_noise: bool = False

    @property
    def size(self) -> int:
        return len(self.members)

    def to_dict(self, with_members: bool = False) -> dict:
        d = {
            "id": self.global_id,
            "index": list(self.cover_index),
            "local": self.local_index,
            "size": self.size,
        }
        if self.is_noise:
            d["noise"] = True
        if with_members:
            d["member_ids"] = sorted(self.members)
        return d


@dataclass
class ClusterCover:
    stage_scale: float
    nodes: list[ClusterNode] = field(default_factory=list)

    def clusters(self) -> list[ClusterNode]:
        return [n for n in self.nodes if not n.is_noise]

    def noise(self) -> list[ClusterNode]:
        return [n for n in self.nodes if n.is_noise]

    def by_index(self) -> dict[tuple, list[ClusterNode]]:
        out: dict[tuple, list[ClusterNode]] = {}
        for n in self.nodes:
            out.setdefault(n.cover_index, []).append(n)
        return out

    def node(self, global_id: int) -> ClusterNode:
        return self._lookup()[global_id]

    def _lookup(self):
        cache = getattr(self, "_by_id", None)
        if cache is None or len(cache) != len(self.nodes):
            cache = {n.global_id: n for n in self.nodes}
            self._by_id = cache
        return cache

    def to_dict(self, with_members: bool = False) -> dict:
        return {"scale": self.stage_scale, "nodes": [n.to_dict(with_members) for n in self.nodes]}


def _cluster_set(cloud_points, image_values, cover_set, params):
    inside = np.flatnonzero(cover_set.contains(image_values))
    if len(inside) == 0:
        return cover_set.index, inside, None
    return cover_set.index, inside, dbscan(cloud_points[inside], params)


def cluster_cover(
    cloud: PointCloud,
    image: LensImage,
    level: TowerLevel,
    params: DbscanParams,
    first_id: int = 0,
    threads: int = 1,
) -> ClusterCover:
    """Cluster the preimage of every cover set of ``level`` in ambient space.

    Global ids are assigned in cover-set order, clusters first and then
    the set's noise node (if any).
    """
    if len(image) != len(cloud):
        raise ParameterError("lens image is not aligned with the cloud")
    pts, vals = cloud.points, image.values
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda cs: _cluster_set(pts, vals, cs, params), level.sets))
    else:
        results = [_cluster_set(pts, vals, cs, params) for cs in level.sets]
    cc = ClusterCover(level.scale)
    gid = first_id
    for index, inside, labels in results:
        if labels is None:
            continue
        n_clusters = labels.max() + 1 if len(labels) else 0
        for c in range(n_clusters):
            cc.nodes.append(ClusterNode(gid, index, c, frozenset(inside[labels == c].tolist())))
            gid += 1
        noise = inside[labels == NOISE]
        if len(noise):
            cc.nodes.append(ClusterNode(gid, index, int(n_clusters), frozenset(noise.tolist()), is_noise=True))
            gid += 1
    return cc


def cluster_map(source: ClusterCover, target: ClusterCover) -> dict[int, int]:
    """Send each non-noise source cluster to the same-index target cluster containing it."""
    owner: dict[tuple, dict[int, int]] = {}
    for node in target.clusters():
        table = owner.setdefault(node.cover_index, {})
        for p in node.members:
            table[p] = node.global_id
    mapping = {}
    for node in source.clusters():
        table = owner.get(node.cover_index, {})
        hits = {table.get(p) for p in node.members}
        if len(hits) != 1 or None in hits:
            raise ContainmentViolationError(
                f"cluster {node.global_id} at index {node.cover_index} is split across "
                f"{sorted(h for h in hits if h is not None)}"
                + (" and missing points" if None in hits else "")
            )
        mapping[node.global_id] = hits.pop()
    return mapping


def compose(first: dict[int, int], second: dict[int, int]) -> dict[int, int]:
    return {k: second[v] for k, v in first.items()}


def cluster_diameter(node: ClusterNode, values: np.ndarray) -> float:
    return float(diameter(values[sorted(node.members)]))


def check_cluster_cover_good(
    tower: Tower,
    cloud: PointCloud,
    image: LensImage,
    params: DbscanParams,
    c: float = 4.0,
    trials: int = 200,
    seed: int = 0,
) -> GoodCoverReport:
    """Empirically test (c, s')-goodness of the cluster covers over ``tower``.

    Cluster diameters are measured in the lens space, where the boxes
    live. ``s'`` is the largest cluster diameter at the finest level.
    (i) ``s' <= s <= diam(image)``; (ii) at every level each cluster's
    diameter is at most the box diameter; (iii) random subsets ``O`` with
    ``diam(O) >= s'`` lie in one cluster of the level at scale
    ``c * diam(O)``.
    """
    values = image.values
    s = tower.resolution
    diam = float(diameter(values, exact_limit=len(values)))
    base = cluster_cover(cloud, image, tower.levels[0], params)
    s_prime = max((cluster_diameter(n, values) for n in base.clusters()), default=0.0)
    cond_i = s_prime <= s + 1e-12 and s <= diam + 1e-12
    cond_ii = True
    for lvl in tower.levels:
        cc = base if lvl is tower.levels[0] else cluster_cover(cloud, image, lvl, params)
        box = tower.level_diameter(lvl)
        cond_ii &= all(cluster_diameter(n, values) <= box + 1e-9 for n in cc.clusters())
    report = GoodCoverReport(c=c, resolution=s_prime, diameter=diam, condition_i=bool(cond_i), condition_ii=bool(cond_ii))
    report.notes.append(f"cubical resolution s = {s:.6g}")
    rng = np.random.default_rng(seed)
    clusterer = PreimageClusterer(cloud.points, params)
    for found in sample_subsets(values, s_prime, trials, rng, strict=False):
        report.trials += 1
        if found is None:
            report.unsampled += 1
            continue
        subset, d = found
        lvl = level_for_scale(tower, c * d)
        if lvl is None:
            report.skipped += 1
            if report.witness is None:
                report.witness = {"reason": "scale beyond tower", "points": subset.tolist(), "diameter": d}
            continue
        report.tested += 1
        if not _inside_one_cluster(clusterer, values, lvl, subset):
            report.failures += 1
            if report.witness is None or report.witness.get("reason") != "not contained":
                report.witness = {"reason": "not contained", "points": subset.tolist(), "diameter": d, "scale": lvl.scale}
    return report


class PreimageClusterer:
    """DBSCAN labels of arbitrary box preimages from one shared neighbour graph.

    The radius graph of the whole cloud is built once; restricting it to
    the points of a box gives exactly the neighbourhoods DBSCAN would see
    on that preimage, so labels agree with ``dbscan`` run on the preimage.
    """

    def __init__(self, points: np.ndarray, params: DbscanParams):
        self.points = np.asarray(points, dtype=float)
        self.params = params
        self.graph = _radius_graph(self.points, params.radius)

    def labels(self, inside: np.ndarray) -> np.ndarray:
        """Labels for the points ``inside`` (sorted indices), numbered as ``dbscan`` numbers them."""
        return _labels_from_graph(self.graph[inside][:, inside], self.params.min_pts)[2]


def _inside_one_cluster(clusterer: PreimageClusterer, values, level: TowerLevel, subset: Sequence[int]) -> bool:
    lo, hi = level.arrays()
    for j in np.flatnonzero(box_contains_any(lo, hi, values[subset])):
        inside = np.flatnonzero(level.sets[j].contains(values))
        labels = clusterer.labels(inside)
        pos = np.searchsorted(inside, subset)
        got = set(labels[pos].tolist())
        if len(got) == 1 and NOISE not in got:
            return True
    return False


def membership_counts(image: LensImage, level: TowerLevel) -> np.ndarray:
    """Number of cover sets of ``level`` containing each lens value."""
    counts = np.zeros(len(image), dtype=int)
    for cs in level.sets:
        counts += cs.contains(image.values)
    return counts


def all_members(nodes: Iterable[ClusterNode]) -> set[int]:
    out: set[int] = set()
    for n in nodes:
        out |= n.members
    return out

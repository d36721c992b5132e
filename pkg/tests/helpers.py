"""Independent oracles and instance generators shared by the tests."""

import itertools
import random

import warnings

import numpy as np

from twomapper.clustering import ClusterCover, ClusterNode, DbscanParams
from twomapper.cover import CubicalCoverSpec, bounding_box, build_tower
from twomapper.nerve import build_two_mapper
from twomapper.persistence import FilteredComplex
from twomapper.pointcloud import Lens, PointCloud, apply_lens


def random_filtered_complex(seed, max_simplices=50, n_vertices=8, n_values=4):
    """A random monotone filtration with at most ``max_simplices`` simplices."""
    rng = random.Random(seed)
    pool = [s for k in (1, 2, 3) for s in itertools.combinations(range(n_vertices), k)]
    rng.shuffle(pool)
    fc = FilteredComplex()
    for s in pool:
        new = [f for k in range(1, len(s) + 1) for f in itertools.combinations(s, k) if f not in fc.simplices]
        if len(fc) + len(new) > max_simplices:
            continue
        fc.insert(s, rng.randrange(n_values))
    # faces inserted with a coface may get a later birth afterwards; restore monotonicity
    for s in sorted(fc.simplices, key=len):
        if len(s) > 1:
            floor = max(fc.simplices[f] for f in itertools.combinations(s, len(s) - 1))
            fc.simplices[s] = max(fc.simplices[s], floor)
    return fc


def reachability_labels(points, radius, min_pts):
    """DBSCAN by explicit density-reachability closure on a full distance matrix.

    Returns a list of frozensets (clusters) over core points plus border
    points attached to their lowest-index core neighbour, and the noise set.
    """
    pts = np.asarray(points, float)
    n = len(pts)
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    near = dist <= radius
    core = near.sum(1) >= min_pts
    seen = set()
    clusters = []
    for i in range(n):
        if not core[i] or i in seen:
            continue
        comp = {i}
        frontier = [i]
        while frontier:
            j = frontier.pop()
            for q in np.flatnonzero(near[j] & core):
                q = int(q)
                if q not in comp:
                    comp.add(q)
                    frontier.append(q)
        seen |= comp
        clusters.append(comp)
    owner = {p: c for c, comp in enumerate(clusters) for p in comp}
    for i in range(n):
        if core[i]:
            continue
        cores = [int(q) for q in np.flatnonzero(near[i] & core)]
        if cores:
            clusters[owner[min(cores)]].add(i)
    noise = {i for i in range(n) if not any(i in c for c in clusters)}
    return [frozenset(c) for c in clusters], noise


def nerve_oracle(member_sets):
    """All-pairs and all-triples intersection test over a dict id -> set."""
    ids = sorted(member_sets)
    edges = {(a, b) for a, b in itertools.combinations(ids, 2) if member_sets[a] & member_sets[b]}
    tris = {
        (a, b, c)
        for a, b, c in itertools.combinations(ids, 3)
        if member_sets[a] & member_sets[b] & member_sets[c]
    }
    return edges, tris


def random_instance(seed):
    """A small random cloud, lens, three-level g tower and DBSCAN radius."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 200))
    dim = int(rng.integers(1, 4))
    cloud = PointCloud(rng.uniform(0, 10, (n, dim)))
    axes = tuple(sorted(rng.choice(dim, size=int(rng.integers(1, dim + 1)), replace=False).tolist()))
    img = apply_lens(cloud, Lens(axes))
    k = int(rng.integers(1, 5))
    gs = np.sort(rng.uniform(0, 0.8, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tower = build_tower(bounding_box(img), CubicalCoverSpec(k, float(gs[0]), len(axes)), gs.tolist())
    return cloud, img, tower, DbscanParams(float(rng.uniform(0.5, 3.0)))


def random_collapse_instance(seed, max_nodes=30):
    """Two consecutive 2-Mapper stages where clusters of one cover set merge.

    Stage ``i`` has disjoint clusters per cover index. Stage ``i + 1`` unions
    random groups of them and adds a few points, so every old cluster lies
    in exactly one new cluster of its index and collapses are frequent.
    """
    rng = random.Random(seed)
    n_points = rng.randint(15, 40)
    old, new = [], []
    n_index = rng.randint(2, 5)
    for alpha in range(n_index):
        pool = rng.sample(range(n_points), rng.randint(4, min(12, n_points)))
        k = rng.randint(1, 4)
        cuts = sorted(rng.sample(range(1, len(pool)), k - 1)) if k > 1 else []
        parts = [pool[a:b] for a, b in zip([0] + cuts, cuts + [len(pool)])]
        if len(old) + len(parts) > max_nodes // 2:
            break
        for part in parts:
            old.append(((alpha,), set(part)))
        groups = {}
        for part in parts:
            groups.setdefault(rng.randrange(max(1, len(parts) - 1)), []).append(part)
        for parts_in_group in groups.values():
            merged = set().union(*parts_in_group)
            # fresh points come from outside this cover set, keeping its clusters disjoint
            outside = sorted(set(range(n_points)) - set(pool) - set().union(*[m for a, m in new if a == (alpha,)], set()))
            merged |= set(rng.sample(outside, min(len(outside), rng.randint(0, 3))))
            new.append(((alpha,), merged))

    def complex_of(entries):
        nodes = [ClusterNode(i, a, i, frozenset(m)) for i, (a, m) in enumerate(entries)]
        return build_two_mapper(ClusterCover(0.0, nodes))

    return complex_of(old), complex_of(new)

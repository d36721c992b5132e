import itertools
import random

import numpy as np
import pytest

from helpers import nerve_oracle, random_instance
from twomapper.clustering import ClusterCover, ClusterNode, DbscanParams, cluster_cover
from twomapper.cover import CubicalCoverSpec, bounding_box, build_tower
from twomapper.nerve import TwoMapperComplex, betti, build_two_mapper, one_skeleton
from twomapper.persistence import oracle_betti
from twomapper.pointcloud import Lens, apply_lens, generate_torus


def cover_of(*member_sets, noise=()):
    nodes = [ClusterNode(i, (i,), 0, frozenset(m)) for i, m in enumerate(member_sets)]
    nodes += [ClusterNode(len(nodes) + j, (99,), 0, frozenset(m), is_noise=True) for j, m in enumerate(noise)]
    return ClusterCover(0.0, nodes)


def test_one_cluster():
    cx = build_two_mapper(cover_of({1, 2, 3}))
    assert list(cx.vertices) == [0] and not cx.edges and betti(cx) == [1, 0, 0]


def test_two_sharing_one_disjoint():
    cx = build_two_mapper(cover_of({1, 2}, {2, 3}, {7}))
    assert cx.edges == {(0, 1)} and not cx.triangles
    assert betti(cx)[0] == 2


def test_noise_excluded_unless_asked():
    cc = cover_of({1, 2}, {3}, noise=[{2, 3}])
    assert 2 not in build_two_mapper(cc).vertices
    with_noise = build_two_mapper(cc, include_noise=True)
    assert with_noise.edges == {(0, 2), (1, 2)}


def test_triple_overlap_needs_common_point():
    hollow = build_two_mapper(cover_of({1, 2}, {2, 3}, {3, 1}))
    assert not hollow.triangles and betti(hollow) == [1, 1, 0]
    filled = build_two_mapper(cover_of({1, 2, 9}, {2, 3, 9}, {3, 1, 9}))
    assert filled.triangles == {(0, 1, 2)} and betti(filled) == [1, 0, 0]


def test_one_skeleton():
    filled = build_two_mapper(cover_of({9}, {9}, {9}))
    graph = one_skeleton(filled)
    assert not graph.triangles and graph.edges == filled.edges
    assert betti(filled)[1] == 0 and betti(graph)[1] == 1
    path = build_two_mapper(cover_of({1}, {1, 2}, {2}))
    assert one_skeleton(path).simplices() == path.simplices()


@pytest.mark.parametrize("seed", range(50))
def test_nerve_matches_oracle(seed):
    cloud, img, tower, params = random_instance(seed)
    cc = cluster_cover(cloud, img, tower[-1], params)
    cx = build_two_mapper(cc)
    edges, tris = nerve_oracle({n.global_id: set(n.members) for n in cc.clusters()})
    assert cx.edges == edges and cx.triangles == tris
    assert set(cx.vertices) == {n.global_id for n in cc.clusters()}
    cx.check_closed()


@pytest.mark.parametrize("seed", range(30))
def test_betti_matches_rank_oracle(seed):
    rng = random.Random(seed)
    cx = TwoMapperComplex()
    pool = [s for k in (1, 2, 3) for s in itertools.combinations(range(7), k)]
    while len(cx.simplices()) < 40:
        before = cx.copy()
        cx.add(rng.choice(pool))
        if len(cx.simplices()) > 40:
            cx = before
            break
    assert betti(cx) == oracle_betti(cx.simplices())


def test_add_closes_faces_and_copy_is_independent():
    cx = TwoMapperComplex()
    cx.add((3, 1, 2))
    assert cx.simplices() == [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]
    assert cx.euler_characteristic == 1
    other = cx.copy()
    other.add((4,))
    assert 4 not in cx.vertices
    d = cx.to_dict()
    assert d["triangles"] == [[1, 2, 3]] and d["vertices"][0] == {"id": 1}


def test_torus_graph_has_at_least_the_complex_cycles():
    cloud = generate_torus(5000, seed=7)
    img = apply_lens(cloud, Lens.projection(0, 1))
    level = build_tower(bounding_box(img), CubicalCoverSpec(6, 0.5, 2), [0.5])[0]
    cx = build_two_mapper(cluster_cover(cloud, img, level, DbscanParams(0.3)))
    assert betti(one_skeleton(cx))[1] >= betti(cx)[1]
    assert betti(cx) == oracle_betti(cx.simplices())

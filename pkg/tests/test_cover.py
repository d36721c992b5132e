import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twomapper.cover import (
    BoundingBox,
    CoverSet,
    CubicalCoverSpec,
    bounding_box,
    box_contains_any,
    build_cubical_cover,
    build_tower,
    check_good_tower,
    epsilon_prime,
    interval_length,
    level_for_scale,
    resolution,
    tower_is_nested,
)
from twomapper.errors import InconsistencyError, ParameterError, ScaleError
from twomapper.pointcloud import Lens, apply_lens, diameter, generate_torus


def intervals_1d(lo, hi, k, g):
    cover = build_cubical_cover(BoundingBox([lo], [hi]), CubicalCoverSpec(k, g, 1))
    return [(float(s.lo[0]), float(s.hi[0])) for s in cover]


def test_bounding_box_examples(rng):
    box = bounding_box([[0, 0], [1, 2]])
    assert box.mins.tolist() == [0, 0] and box.maxs.tolist() == [1, 2]
    single = bounding_box([[3.0, -1.0]])
    assert np.array_equal(single.mins, single.maxs)
    pts = rng.uniform(-1, 1, (1000, 2))
    scan = bounding_box(pts)
    for axis in range(2):
        col = [p[axis] for p in pts]
        assert scan.mins[axis] == min(col) and scan.maxs[axis] == max(col)


def test_single_interval():
    assert intervals_1d(0, 1, 1, 0.5) == [(0.0, 1.0)]


def test_two_intervals_by_interval_arithmetic():
    (a0, a1), (b0, b1) = intervals_1d(0, 2, 2, 0.5)
    assert (a0, a1, b0, b1) == pytest.approx((0, 4 / 3, 2 / 3, 2))
    # union is the box, overlap is g * l
    assert a0 == pytest.approx(0) and b1 == pytest.approx(2) and b0 <= a1
    assert a1 - b0 == pytest.approx(0.5 * 4 / 3)


@pytest.mark.parametrize("k", [1, 2, 3, 6, 10])
@pytest.mark.parametrize("g", [0.0, 0.25, 0.5, 0.75])
def test_intervals_tile_with_uniform_overlap(k, g):
    ivs = intervals_1d(-1.5, 4.0, k, g)
    l = 5.5 / (k - (k - 1) * g)
    assert ivs[0][0] == pytest.approx(-1.5) and ivs[-1][1] == pytest.approx(4.0)
    for lo, hi in ivs:
        assert hi - lo == pytest.approx(l)
    for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
        assert hi - lo == pytest.approx(g * l)


def test_torus_cover_and_coverage(rng):
    box = BoundingBox([-3, -3], [3, 3])
    cover = build_cubical_cover(box, CubicalCoverSpec(6, 0.5, 2))
    assert len(cover) == 36
    assert sorted(s.index for s in cover) == list(itertools.product(range(6), repeat=2))
    for s in cover:
        assert s.widths == pytest.approx([12 / 7, 12 / 7])
    samples = rng.uniform(-3, 3, (10_000, 2))
    hits = np.zeros(len(samples), dtype=int)
    for s in cover:
        hits += s.contains(samples)
    assert hits.min() >= 1
    # with g = 0.5 a coordinate lies in at most two intervals per axis
    assert hits.max() <= 4
    assert resolution(cover) == pytest.approx(math.sqrt(2) * 12 / 7)
    assert resolution(cover) == pytest.approx(2.4244, abs=1e-4)


def test_resolution_examples():
    one = CoverSet((0,), np.array([0.0]), np.array([1.0]))
    assert resolution([one]) == 1
    pyth = CoverSet((0, 0), np.zeros(2), np.array([3.0, 4.0]))
    assert resolution([pyth]) == 5
    other = CoverSet((0, 1), np.zeros(2), np.array([3.0, 5.0]))
    with pytest.raises(InconsistencyError):
        resolution([pyth, other])


def test_cover_rejects_bad_params():
    with pytest.raises(ParameterError):
        CubicalCoverSpec(0, 0.5, 1)
    with pytest.raises(ParameterError):
        CubicalCoverSpec(2, 1.0, 1)
    with pytest.raises(ParameterError):
        build_cubical_cover(BoundingBox([0], [1]), CubicalCoverSpec(2, 0.5, 2))


def test_small_k_warns():
    box = BoundingBox(np.zeros(4), np.ones(4))
    with pytest.warns(UserWarning, match="sqrt"):
        build_cubical_cover(box, CubicalCoverSpec(1, 0.0, 4))


def test_degenerate_axis_is_padded():
    with pytest.warns(UserWarning, match="degenerate"):
        cover = build_cubical_cover(BoundingBox([0, 5], [1, 5]), CubicalCoverSpec(2, 0.5, 2))
    assert all(s.lo[1] < 5 < s.hi[1] for s in cover)


@pytest.mark.parametrize(
    "l, s, eps, want",
    [([1.0], 1.0, 2.0, 1.0), ([1.0, 1.0], math.sqrt(2), 2 * math.sqrt(2), 1.0), ([2.0, 3.0], math.sqrt(13), math.sqrt(13), 0.0)],
)
def test_epsilon_prime_examples(l, s, eps, want):
    e = epsilon_prime(l, s, eps)
    assert e == pytest.approx(want)
    assert np.linalg.norm(np.asarray(l) + e) == pytest.approx(eps)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0.01, 10), min_size=1, max_size=5),
    st.floats(1.0, 20.0),
)
def test_epsilon_prime_norm_identity(l, factor):
    l = np.array(l)
    s = float(np.linalg.norm(l))
    e = epsilon_prime(l, s, s * factor)
    assert e >= 0
    assert np.linalg.norm(l + e) == pytest.approx(s * factor, rel=1e-9)


def test_epsilon_prime_errors():
    with pytest.raises(ScaleError):
        epsilon_prime([1.0], 1.0, 0.5)
    with pytest.raises(ParameterError):
        epsilon_prime([1.0], 2.0, 3.0)


def test_eps_tower_base_level_is_base_cover():
    box = BoundingBox([0, 0], [2, 3])
    spec = CubicalCoverSpec(3, 0.3, 2)
    base = build_cubical_cover(box, spec)
    tower = build_tower(box, spec, [resolution(base)], mode="eps")
    for a, b in zip(base, tower[0].sets):
        assert a.index == b.index
        assert np.allclose(a.lo, b.lo) and np.allclose(a.hi, b.hi)


def test_eps_tower_diameters_and_symmetric_growth():
    box = BoundingBox([0, 0], [2, 3])
    spec = CubicalCoverSpec(3, 0.3, 2)
    base = build_cubical_cover(box, spec)
    tower = build_tower(box, spec, [resolution(base) * f for f in (1, 1.5, 4)], mode="eps")
    assert tower_is_nested(tower)
    for lvl in tower:
        for a, b in zip(base, lvl.sets):
            assert b.diameter == pytest.approx(lvl.scale)
            assert np.allclose((a.lo + a.hi) / 2, (b.lo + b.hi) / 2)


def test_g_tower_example():
    tower = build_tower(BoundingBox([0], [2]), CubicalCoverSpec(2, 0.25, 1), [0.25, 0.5])
    (a, b), (c, d) = tower[0].sets, tower[1].sets
    assert (a.lo[0], a.hi[0], b.lo[0], b.hi[0]) == pytest.approx((0, 8 / 7, 6 / 7, 2))
    assert (c.lo[0], c.hi[0], d.lo[0], d.hi[0]) == pytest.approx((0, 4 / 3, 2 / 3, 2))
    assert tower_is_nested(tower)


@pytest.mark.parametrize("schedule", [[0.5, 0.25], [0.3, 0.3], []])
def test_tower_rejects_bad_schedule(schedule):
    with pytest.raises(ParameterError):
        build_tower(BoundingBox([0], [1]), CubicalCoverSpec(2, 0.0, 1), schedule)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(2, 6),
    st.floats(0.0, 0.9),
    st.floats(0.0, 0.9),
)
def test_g_tower_nesting_oracle(seed, k, g1, g2):
    if abs(g1 - g2) < 1e-6:
        return
    g1, g2 = sorted((g1, g2))
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 4))
    mins = rng.uniform(-5, 5, dim)
    box = BoundingBox(mins, mins + rng.uniform(0.1, 5, dim))
    tower = build_tower(box, CubicalCoverSpec(k, g1, dim), [g1, g2])
    for small, big in zip(tower[0].sets, tower[1].sets):
        assert small.index == big.index
        # interval-containment oracle, axis by axis, no slack
        for i in range(dim):
            assert big.lo[i] <= small.lo[i] and small.hi[i] <= big.hi[i]


def test_level_for_scale():
    box = BoundingBox([0], [2])
    g_tower = build_tower(box, CubicalCoverSpec(2, 0.0, 1), [0.0, 0.25, 0.5])
    assert level_for_scale(g_tower, 1.1).scale == 0.25
    assert level_for_scale(g_tower, 100) is None
    eps_tower = build_tower(box, CubicalCoverSpec(2, 0.0, 1), [1.0, 3.0], mode="eps")
    assert level_for_scale(eps_tower, 2.0).sets[0].diameter == pytest.approx(2.0)
    assert level_for_scale(eps_tower, 0.1).scale == 1.0
    assert level_for_scale(eps_tower, 3.5) is None


def test_box_contains_any():
    lo = np.array([[0.0, 0.0], [1.0, 1.0]])
    hi = np.array([[1.0, 1.0], [2.0, 2.0]])
    assert box_contains_any(lo, hi, np.array([[0.5, 0.5], [1.0, 1.0]])).tolist() == [True, False]
    assert box_contains_any(lo, hi, np.array([[1.0, 1.0]])).tolist() == [True, True]


@pytest.fixture(scope="module")
def torus_image():
    return apply_lens(generate_torus(5000, seed=7), Lens.projection(0, 1))


def eps_tower_for(image, k=6, g=0.5, c=3.0, levels=8):
    box = bounding_box(image)
    spec = CubicalCoverSpec(k, g, image.dim)
    s = float(np.linalg.norm(interval_length(box, k, g)))
    return build_tower(box, spec, np.linspace(s, c * float(diameter(image.values)), levels), mode="eps")


def test_torus_tower_is_good(torus_image):
    report = check_good_tower(eps_tower_for(torus_image), torus_image, c=3, trials=200, seed=0)
    assert report.condition_i and report.condition_ii and report.condition_iii
    assert report.tested == 200


@pytest.mark.parametrize("k, g", [(2, 0.1), (2, 0.5), (6, 0.5), (9, 0.8)])
def test_condition_i_holds_on_own_box(torus_image, k, g):
    # each side is at most diam, so s <= sqrt(n) diam / (k - (k - 1) g)
    assert k - (k - 1) * g >= math.sqrt(2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tower = build_tower(bounding_box(torus_image), CubicalCoverSpec(k, g, 2), [g])
    report = check_good_tower(tower, torus_image, trials=0)
    assert report.condition_i and report.condition_ii


def test_condition_i_can_fail_for_a_single_box(torus_image):
    # one box is the whole bounding box, whose diagonal exceeds the diameter of a circle
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tower = build_tower(bounding_box(torus_image), CubicalCoverSpec(1, 0.0, 2), [0.0])
    report = check_good_tower(tower, torus_image, trials=0)
    assert not report.condition_i
    assert report.resolution > 1.4 * report.diameter


def test_pair_containment_matches_exhaustive_search(torus_image):
    tower = eps_tower_for(torus_image)
    s = tower.resolution
    values = torus_image.values
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 20:
        i, j = rng.integers(len(values), size=2)
        d = float(np.linalg.norm(values[i] - values[j]))
        if not s < d <= s + 0.01:
            continue
        level = level_for_scale(tower, 3 * d)
        pair = values[[i, j]]
        exhaustive = any(bool(np.all(cs.contains(pair))) for cs in level.sets)
        lo, hi = level.arrays()
        assert exhaustive == bool(box_contains_any(lo, hi, pair).any()) == True  # noqa: E712
        checked += 1


def test_truncated_tower_counts_skips(torus_image):
    box = bounding_box(torus_image)
    s = float(np.linalg.norm(interval_length(box, 6, 0.5)))
    tower = build_tower(box, CubicalCoverSpec(6, 0.5, 2), [s, 1.5 * s], mode="eps")
    report = check_good_tower(tower, torus_image, c=3, trials=50, seed=1)
    assert report.skipped > 0 and not report.condition_iii and not report.passed
    assert report.witness["reason"] == "scale beyond tower"


def test_report_merge_and_dict(torus_image):
    tower = eps_tower_for(torus_image, levels=3)
    a = check_good_tower(tower, torus_image, trials=5, seed=0)
    b = check_good_tower(tower, torus_image, trials=7, seed=1)
    m = a.merge(b)
    assert m.trials == 12 and m.to_dict()["condition_iii"] == m.condition_iii

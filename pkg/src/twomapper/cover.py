"""Cubical covers of a lens image and towers of them.

A cubical cover with ``k`` intervals per axis and overlap fraction ``g``
splits each side ``[m_i, M_i]`` of the bounding box into ``k`` closed
intervals of common length ``l_i = (M_i - m_i) / (k - (k - 1) g)`` whose
neighbours overlap by ``g * l_i``. Cover sets are products of one
interval per axis, indexed by 0-based multi-indices.

Two kinds of tower are supported:

``"eps"``
    The base cover's boxes are grown symmetrically by ``eps'`` per axis so
    that every box has Euclidean diameter ``eps``. Scales are diameters.
``"g"``
    ``k`` is fixed and the overlap fraction increases. Scales are overlap
    fractions.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInputError, InconsistencyError, ParameterError, ScaleError
from .pointcloud import LensImage, diameter

CONTAINMENT_SLACK = 1e-12


@dataclass(frozen=True)
class BoundingBox:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=float).ravel()
        maxs = np.asarray(self.maxs, dtype=float).ravel()
        if mins.shape != maxs.shape:
            raise ParameterError("mins and maxs must have the same length")
        if np.any(mins > maxs):
            raise ParameterError(f"bounding box with mins > maxs: {mins} {maxs}")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def dim(self) -> int:
        return len(self.mins)

    @property
    def widths(self) -> np.ndarray:
        return self.maxs - self.mins


@dataclass(frozen=True)
class CubicalCoverSpec:
    k: int
    g: float
    n: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if not 0 <= self.g < 1:
            raise ParameterError(f"overlap fraction must lie in [0, 1), got {self.g}")
        if self.n < 1:
            raise ParameterError(f"lens dimension must be >= 1, got {self.n}")

    @property
    def below_sqrt_n(self) -> bool:
        """True when ``k < sqrt(n)``, outside the regime where the cubical tower is known to be good."""
        return self.k < math.sqrt(self.n)


@dataclass(frozen=True)
class CoverSet:
    index: tuple[int, ...]
    lo: np.ndarray
    hi: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(values)
        return np.all((values >= self.lo) & (values <= self.hi), axis=1)


@dataclass
class TowerLevel:
    scale: float
    sets: list[CoverSet]

    def __iter__(self) -> Iterator[CoverSet]:
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([s.lo for s in self.sets]), np.array([s.hi for s in self.sets])


def bounding_box(values) -> BoundingBox:
    vals = values.values if isinstance(values, LensImage) else np.atleast_2d(np.asarray(values, float))
    if vals.size == 0:
        raise EmptyInputError("bounding box of an empty image")
    return BoundingBox(vals.min(axis=0), vals.max(axis=0))


def _padded(bbox: BoundingBox) -> BoundingBox:
    widths = bbox.widths
    if np.all(widths > 0):
        return bbox
    pad = np.maximum(1e-9, 1e-9 * np.abs(bbox.mins))
    flat = widths <= 0
    warnings.warn(f"degenerate bounding box on axes {np.flatnonzero(flat).tolist()}; padding", stacklevel=3)
    return BoundingBox(np.where(flat, bbox.mins - pad, bbox.mins), np.where(flat, bbox.maxs + pad, bbox.maxs))


def interval_length(bbox: BoundingBox, k: int, g: float) -> np.ndarray:
    return _padded(bbox).widths / (k - (k - 1) * g)


def interval_centers(bbox: BoundingBox, k: int, g: float) -> list[np.ndarray]:
    """Per axis, the ``k`` interval centers ``m_i + a (1 - g) l_i + l_i / 2``."""
    box = _padded(bbox)
    lengths = box.widths / (k - (k - 1) * g)
    steps = np.arange(k)
    return [box.mins[i] + steps * (1 - g) * lengths[i] + lengths[i] / 2 for i in range(box.dim)]


def interval_bounds(bbox: BoundingBox, k: int, g: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per axis, the interval ends ``m_i + a (1 - g) l_i`` and that plus ``l_i``.

    The outer ends are pinned to ``m_i`` and ``M_i`` so that rounding can
    never push a box outside the bounding box or break nesting across ``g``.
    """
    box = _padded(bbox)
    lengths = box.widths / (k - (k - 1) * g)
    steps = np.arange(k)
    out = []
    for i in range(box.dim):
        lo = box.mins[i] + steps * ((1 - g) * lengths[i])
        hi = lo + lengths[i]
        lo[0], hi[-1] = box.mins[i], box.maxs[i]
        out.append((lo, hi))
    return out


def _boxes(centers: list[np.ndarray], widths: np.ndarray) -> list[CoverSet]:
    k_per_axis = [len(c) for c in centers]
    sets = []
    for index in itertools.product(*(range(k) for k in k_per_axis)):
        mid = np.array([centers[i][a] for i, a in enumerate(index)])
        sets.append(CoverSet(tuple(index), mid - widths / 2, mid + widths / 2))
    return sets


def build_cubical_cover(bbox: BoundingBox, spec: CubicalCoverSpec) -> list[CoverSet]:
    if bbox.dim != spec.n:
        raise ParameterError(f"cover spec dimension {spec.n} does not match box dimension {bbox.dim}")
    if spec.below_sqrt_n:
        warnings.warn(f"k={spec.k} < sqrt(n)={math.sqrt(spec.n):.3f}: the tower may not be (3,s)-good", stacklevel=2)
    bounds = interval_bounds(bbox, spec.k, spec.g)
    sets = []
    for index in itertools.product(range(spec.k), repeat=spec.n):
        lo = np.array([bounds[i][0][a] for i, a in enumerate(index)])
        hi = np.array([bounds[i][1][a] for i, a in enumerate(index)])
        sets.append(CoverSet(tuple(index), lo, hi))
    return sets


def resolution(cover: Sequence[CoverSet], tol: float = 1e-9) -> float:
    """Diameter shared by all boxes of ``cover``."""
    if len(cover) == 0:
        raise EmptyInputError("resolution of an empty cover")
    widths = np.array([s.widths for s in cover])
    if not np.allclose(widths, widths[0], rtol=0, atol=tol):
        raise InconsistencyError("cover sets do not share a common width vector")
    return float(np.linalg.norm(widths[0]))


def epsilon_prime(l, s: float, eps: float) -> float:
    """Common per-axis growth taking boxes of widths ``l`` to diameter ``eps``.

    Solves ``||l + e||_2 = eps`` for ``e >= 0`` (the positive root of
    ``n e^2 + 2 ||l||_1 e + s^2 - eps^2 = 0``).
    """
    l = np.asarray(l, dtype=float).ravel()
    n = len(l)
    if abs(float(np.linalg.norm(l)) - s) > 1e-9:
        raise ParameterError(f"s={s} is not the norm of the width vector {l}")
    if eps < s:
        raise ScaleError(f"scale {eps} is below the resolution {s}")
    l1 = float(l.sum())
    root = -l1 / n + math.sqrt(l1 * l1 / (n * n) + (eps * eps - s * s) / n)
    return max(root, 0.0)


@dataclass
class Tower:
    """A nested family of cubical covers sharing one index set."""

    bbox: BoundingBox
    k: int
    g: float
    mode: str
    levels: list[TowerLevel] = field(default_factory=list)

    def __iter__(self) -> Iterator[TowerLevel]:
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, i) -> TowerLevel:
        return self.levels[i]

    @property
    def scales(self) -> list[float]:
        return [lvl.scale for lvl in self.levels]

    @property
    def base_lengths(self) -> np.ndarray:
        return interval_length(self.bbox, self.k, self.g)

    @property
    def resolution(self) -> float:
        """Diameter of the base cover's boxes (eps towers) or of the finest level's boxes."""
        if self.mode == "eps":
            return float(np.linalg.norm(self.base_lengths))
        return resolution(self.levels[0].sets)

    def level_at(self, scale: float) -> TowerLevel:
        """Build the level for an arbitrary admissible scale."""
        if self.mode == "eps":
            base = self.base_lengths
            grow = epsilon_prime(base, float(np.linalg.norm(base)), scale)
            return TowerLevel(scale, _boxes(interval_centers(self.bbox, self.k, self.g), base + grow))
        spec = CubicalCoverSpec(self.k, scale, self.bbox.dim)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return TowerLevel(scale, build_cubical_cover(self.bbox, spec))

    def level_diameter(self, level: TowerLevel) -> float:
        return level.sets[0].diameter

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "k": self.k,
            "g": self.g,
            "bbox": {"mins": self.bbox.mins.tolist(), "maxs": self.bbox.maxs.tolist()},
            "levels": [
                {
                    "scale": lvl.scale,
                    "sets": [{"index": list(s.index), "lo": s.lo.tolist(), "hi": s.hi.tolist()} for s in lvl.sets],
                }
                for lvl in self.levels
            ],
        }


def build_tower(bbox: BoundingBox, spec: CubicalCoverSpec, schedule: Sequence[float], mode: str = "g") -> Tower:
    """Build a tower over ``bbox``.

    In ``"g"`` mode ``schedule`` lists overlap fractions and ``spec.g`` is
    ignored. In ``"eps"`` mode ``schedule`` lists box diameters, each at
    least the resolution of the ``(spec.k, spec.g)`` cover.
    """
    if mode not in ("g", "eps"):
        raise ParameterError(f"unknown tower mode {mode!r}")
    schedule = [float(x) for x in schedule]
    if not schedule:
        raise ParameterError("empty scale schedule")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ParameterError(f"scale schedule must be strictly increasing, got {schedule}")
    if spec.below_sqrt_n:
        warnings.warn(f"k={spec.k} < sqrt(n)={math.sqrt(spec.n):.3f}: the tower may not be (3,s)-good", stacklevel=2)
    base_g = schedule[0] if mode == "g" else spec.g
    tower = Tower(bbox, spec.k, base_g, mode)
    tower.levels = [tower.level_at(x) for x in schedule]
    return tower


def tower_is_nested(tower: Tower, slack: float = CONTAINMENT_SLACK) -> bool:
    for small, big in zip(tower.levels, tower.levels[1:]):
        for a, b in zip(small.sets, big.sets):
            if a.index != b.index:
                return False
            if np.any(b.lo > a.lo + slack) or np.any(a.hi > b.hi + slack):
                return False
    return True


@dataclass
class GoodCoverReport:
    """Outcome of an empirical (c, s)-good check.

    ``condition_iii`` fails when any sampled subset is not contained in a
    single set, and also when a subset needed a scale beyond the tower
    (those trials are counted in ``skipped``).
    """

    c: float
    resolution: float
    diameter: float
    condition_i: bool
    condition_ii: bool
    trials: int = 0
    tested: int = 0
    failures: int = 0
    skipped: int = 0
    unsampled: int = 0
    witness: list | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def condition_iii(self) -> bool:
        return self.failures == 0 and self.skipped == 0

    @property
    def passed(self) -> bool:
        return self.condition_i and self.condition_ii and self.condition_iii

    def merge(self, other: "GoodCoverReport") -> "GoodCoverReport":
        return GoodCoverReport(
            c=self.c,
            resolution=self.resolution,
            diameter=self.diameter,
            condition_i=self.condition_i and other.condition_i,
            condition_ii=self.condition_ii and other.condition_ii,
            trials=self.trials + other.trials,
            tested=self.tested + other.tested,
            failures=self.failures + other.failures,
            skipped=self.skipped + other.skipped,
            unsampled=self.unsampled + other.unsampled,
            witness=self.witness if self.witness is not None else other.witness,
            notes=self.notes + other.notes,
        )

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "resolution": self.resolution,
            "diameter": self.diameter,
            "condition_i": self.condition_i,
            "condition_ii": self.condition_ii,
            "condition_iii": self.condition_iii,
            "trials": self.trials,
            "tested": self.tested,
            "failures": self.failures,
            "skipped": self.skipped,
            "unsampled": self.unsampled,
            "witness": self.witness,
            "notes": self.notes,
        }


def sample_subsets(values: np.ndarray, min_diam: float, trials: int, rng, max_size: int = 8, strict=True):
    """Yield random local subsets of rows of ``values`` with diameter above ``min_diam``.

    Each subset is a random point plus random neighbours inside a ball of
    random radius, always including the neighbour farthest from the center.
    Yields ``None`` for a trial when no qualifying subset was found.
    """
    tree = cKDTree(values)
    spread = float(diameter(values, exact_limit=len(values)))
    for _ in range(trials):
        found = None
        for _attempt in range(100):
            p = int(rng.integers(len(values)))
            rho = rng.uniform(min_diam, max(spread, min_diam) + 1e-12)
            ball = np.asarray(tree.query_ball_point(values[p], rho), dtype=int)
            dist = np.linalg.norm(values[ball] - values[p], axis=1)
            far = int(ball[np.argmax(dist)])
            others = ball[(ball != p) & (ball != far)]
            size = int(rng.integers(0, max_size - 1))
            picked = rng.choice(others, size=min(size, len(others)), replace=False) if len(others) else []
            subset = np.unique(np.concatenate([[p, far], np.asarray(picked, dtype=int)]))
            d = float(diameter(values[subset]))
            if d > min_diam or (not strict and d >= min_diam):
                found = (subset, d)
                break
        yield found


def box_contains_any(lo: np.ndarray, hi: np.ndarray, pts: np.ndarray, slack: float = CONTAINMENT_SLACK) -> np.ndarray:
    """Mask over boxes ``(lo[j], hi[j])`` that contain every row of ``pts``."""
    pmin = pts.min(axis=0)
    pmax = pts.max(axis=0)
    return np.all(lo <= pmin + slack, axis=1) & np.all(pmax <= hi + slack, axis=1)


def level_for_scale(tower: Tower, target: float) -> TowerLevel | None:
    if tower.mode == "eps":
        if target > tower.scales[-1] + 1e-12:
            return None
        return tower.level_at(max(target, tower.scales[0]))
    for lvl in tower.levels:
        if tower.level_diameter(lvl) >= target - 1e-12:
            return lvl
    return None


def check_good_tower(tower: Tower, image, c: float = 3.0, trials: int = 200, seed: int = 0) -> GoodCoverReport:
    """Empirically test the three (c, s)-good conditions on ``tower``.

    (i) the resolution is at most the image diameter; (ii) every level's
    boxes have diameter equal to its scale (eps towers) or a common
    diameter (g towers); (iii) random subsets ``O`` of image points with
    ``diam(O) > s`` fit inside one box of the level at scale
    ``c * diam(O)``. For g towers, that is the first level whose box
    diameter reaches ``c * diam(O)``.
    """
    values = image.values if isinstance(image, LensImage) else np.asarray(image, float)
    s = tower.resolution
    diam = float(diameter(values, exact_limit=len(values)))
    cond_i = s <= diam + 1e-12
    cond_ii = True
    for lvl in tower.levels:
        diams = np.array([cs.diameter for cs in lvl.sets])
        if tower.mode == "eps":
            cond_ii &= bool(np.all(np.abs(diams - lvl.scale) <= 1e-6))
        else:
            cond_ii &= bool(np.allclose(diams, diams[0], rtol=0, atol=1e-9))
    report = GoodCoverReport(c=c, resolution=s, diameter=diam, condition_i=bool(cond_i), condition_ii=bool(cond_ii))
    rng = np.random.default_rng(seed)
    for found in sample_subsets(values, s, trials, rng):
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
        lo, hi = lvl.arrays()
        if not box_contains_any(lo, hi, values[subset]).any():
            report.failures += 1
            if report.witness is None or report.witness.get("reason") != "not contained":
                report.witness = {
                    "reason": "not contained",
                    "points": subset.tolist(),
                    "diameter": d,
                    "scale": lvl.scale,
                }
    if report.unsampled:
        report.notes.append(f"{report.unsampled} trials found no subset with diameter > {s:.6g}")
    return report

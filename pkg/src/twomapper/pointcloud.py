"""Point clouds, synthetic manifolds, lens functions and diameters."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import cdist

from .errors import EmptyInputError, FormatError, ParameterError, ParseError

# Inputs above this size get an approximate diameter.
EXACT_DIAMETER_LIMIT = 5000


@dataclass(frozen=True)
class PointCloud:
    """A finite point set in R^n. Point ``i`` has id ``i``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ParameterError(f"points must be an (N, n) array with n >= 1, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self.points))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Lens:
    """Coordinate projection onto ``axes``, or the identity when ``axes`` is None."""

    axes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.axes is not None:
            axes = tuple(int(a) for a in self.axes)
            if not axes:
                raise ParameterError("a projection lens needs at least one axis")
            if len(set(axes)) != len(axes):
                raise ParameterError(f"lens axes must be distinct, got {axes}")
            object.__setattr__(self, "axes", axes)

    @classmethod
    def projection(cls, *axes: int) -> "Lens":
        return cls(tuple(axes))

    @classmethod
    def identity(cls) -> "Lens":
        return cls(None)

    @property
    def kind(self) -> str:
        return "identity" if self.axes is None else "projection"

    def output_dim(self, input_dim: int) -> int:
        return input_dim if self.axes is None else len(self.axes)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "axes": None if self.axes is None else list(self.axes)}


@dataclass(frozen=True)
class LensImage:
    """Lens values, row ``i`` belonging to point id ``i`` of the source cloud."""

    values: np.ndarray
    lens: Lens = field(default_factory=Lens.identity)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


class Diameter(float):
    """A float carrying whether it is the exact diameter."""

    exact: bool

    def __new__(cls, value, exact=True):
        obj = super().__new__(cls, value)
        obj.exact = exact
        return obj

    def __repr__(self):
        tag = "" if self.exact else ", approximate"
        return f"Diameter({float(self)!r}{tag})"


def load_csv(path, has_header: bool = False) -> PointCloud:
    """Read a comma separated file of floats, one point per row."""
    path = Path(path)
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if has_header and lines:
        lines = lines[1:]
    if not lines:
        raise EmptyInputError(f"{path}: no data rows")
    offset = 2 if has_header else 1
    rows = []
    width = None
    for i, line in enumerate(lines):
        fields = line.split(",")
        rownum = i + offset
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise FormatError(
                f"{path}: row {rownum} has {len(fields)} fields, expected {width}", row=rownum
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            col = next(j for j, f in enumerate(fields) if not _is_float(f)) + 1
            raise ParseError(
                f"{path}: row {rownum}, column {col}: not a number: {fields[col - 1].strip()!r}",
                row=rownum,
                column=col,
            ) from None
    return PointCloud(np.array(rows, dtype=float))


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def save_csv(cloud: PointCloud, path, header: Sequence[str] | None = None) -> None:
    with open(path, "w") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for p in cloud.points:
            fh.write(",".join(repr(float(x)) for x in p) + "\n")


def _check_radii(n_points, R, r):
    if n_points < 1:
        raise ParameterError(f"n_points must be >= 1, got {n_points}")
    if not 0 < r < R:
        raise ParameterError(f"need 0 < r < R (a self-intersecting surface otherwise), got R={R}, r={r}")


def _angles(n_points, seed):
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 2 * np.pi, n_points)
    v = rng.uniform(0.0, 2 * np.pi, n_points)
    return u, v


def generate_torus(n_points: int, R: float = 2.0, r: float = 1.0, seed: int = 0) -> PointCloud:
    """Sample a torus in R^3, uniform in the angle parameters."""
    _check_radii(n_points, R, r)
    u, v = _angles(n_points, seed)
    ring = R + r * np.cos(v)
    return PointCloud(np.column_stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v)]))


def generate_klein_bottle(n_points: int, R: float = 2.0, r: float = 1.0, seed: int = 0) -> PointCloud:
    """Sample the flat-tube Klein bottle embedded in R^4.

    The embedding is ``((R + r cos v) cos u, (R + r cos v) sin u,
    r sin v cos(u/2), r sin v sin(u/2))`` with ``u, v`` uniform in
    ``[0, 2 pi)``. Projecting onto the first three coordinates gives the
    usual immersed picture, which pinches the tube to a segment at
    ``u = pi``.
    """
    _check_radii(n_points, R, r)
    u, v = _angles(n_points, seed)
    ring = R + r * np.cos(v)
    return PointCloud(
        np.column_stack(
            [
                ring * np.cos(u),
                ring * np.sin(u),
                r * np.sin(v) * np.cos(u / 2),
                r * np.sin(v) * np.sin(u / 2),
            ]
        )
    )


def apply_lens(cloud: PointCloud, lens: Lens) -> LensImage:
    if lens.axes is None:
        return LensImage(cloud.points.copy(), lens)
    bad = [a for a in lens.axes if not 0 <= a < cloud.dim]
    if bad:
        raise ParameterError(f"lens axes {bad} out of range for dimension {cloud.dim}")
    return LensImage(cloud.points[:, list(lens.axes)].copy(), lens)


def _as_array(values) -> np.ndarray:
    if isinstance(values, PointCloud):
        return values.points
    if isinstance(values, LensImage):
        return values.values
    return np.atleast_2d(np.asarray(values, dtype=float))


def diameter(values, exact_limit: int = EXACT_DIAMETER_LIMIT) -> Diameter:
    """Largest pairwise Euclidean distance.

    Always exact in dimensions 1 to 3, where the farthest pair lies on the
    convex hull. Otherwise exact for at most ``exact_limit`` points; larger
    inputs use a double farthest-point sweep, which returns a lower bound
    ``d`` with ``d <= diam <= 2 d`` and is flagged ``exact=False``.
    """
    pts = _as_array(values)
    if len(pts) == 0:
        raise EmptyInputError("diameter of an empty point set")
    if len(pts) == 1:
        return Diameter(0.0)
    if pts.shape[1] == 1:
        return Diameter(float(pts.max() - pts.min()))
    if pts.shape[1] <= 3 and len(pts) > 64:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            # flat or otherwise degenerate input; fall through to pairwise distances
            if len(pts) > exact_limit:
                pts = np.unique(pts, axis=0)
        else:
            exact_limit = max(exact_limit, len(pts))
    if len(pts) <= exact_limit:
        best = 0.0
        chunk = 512
        for start in range(0, len(pts), chunk):
            block = cdist(pts[start : start + chunk], pts[start:])
            best = max(best, float(block.max()))
        return Diameter(best)
    a = pts[np.argmax(np.linalg.norm(pts - pts[0], axis=1))]
    return Diameter(float(np.linalg.norm(pts - a, axis=1).max()), exact=False)


def knn_radius(cloud: PointCloud, k: int = 3) -> float:
    """Mean distance from each point to its ``k``-th nearest other point."""
    from scipy.spatial import cKDTree

    if len(cloud) <= k:
        raise ParameterError(f"need more than {k} points for the {k}-NN radius heuristic")
    dist, _ = cKDTree(cloud.points).query(cloud.points, k=k + 1)
    return float(dist[:, k].mean())

"""Filtered simplicial complexes and their Z/2 persistent homology."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import MonotonicityError

INF = math.inf


def canonical(simplex: Iterable[int]) -> tuple[int, ...]:
    s = tuple(sorted(int(v) for v in simplex))
    if len(set(s)) != len(s):
        raise ValueError(f"simplex with a repeated vertex: {s}")
    return s


def faces(simplex: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Codimension-one faces of a canonical simplex."""
    if len(simplex) == 1:
        return []
    return [simplex[:i] + simplex[i + 1 :] for i in range(len(simplex))]


class FilteredComplex:
    """Simplices (dimension 0 to 2) with birth values.

    ``insert`` follows simplex-tree semantics: missing faces are added at
    the same birth, and an existing simplex keeps its earlier birth.
    """

    def __init__(self, simplices: dict | None = None):
        self.simplices: dict[tuple[int, ...], float] = {}
        if simplices:
            for s, b in simplices.items():
                self.simplices[canonical(s)] = float(b)

    def __len__(self):
        return len(self.simplices)

    def __contains__(self, simplex):
        return canonical(simplex) in self.simplices

    def __iter__(self):
        return iter(self.simplices.items())

    def birth(self, simplex) -> float:
        return self.simplices[canonical(simplex)]

    def insert(self, simplex, birth: float) -> None:
        s = canonical(simplex)
        for k in range(1, len(s) + 1):
            for face in itertools.combinations(s, k):
                old = self.simplices.get(face)
                if old is None or birth < old:
                    self.simplices[face] = float(birth)

    def dimension_counts(self) -> list[int]:
        counts = [0, 0, 0]
        for s in self.simplices:
            counts[len(s) - 1] += 1
        return counts

    def sublevel(self, t: float) -> set[tuple[int, ...]]:
        return {s for s, b in self.simplices.items() if b <= t}

    def values(self) -> list[float]:
        return sorted(set(self.simplices.values()))

    def check_monotone(self) -> None:
        for s, b in self.simplices.items():
            if len(s) > 3:
                raise MonotonicityError(f"simplex {s} has dimension above 2", simplex=s)
            for f in faces(s):
                fb = self.simplices.get(f)
                if fb is None:
                    raise MonotonicityError(f"face {f} of {s} is missing", simplex=s)
                if fb > b:
                    raise MonotonicityError(f"face {f} born at {fb} after {s} at {b}", simplex=s)

    def ordered(self) -> list[tuple[tuple[int, ...], float]]:
        return sorted(self.simplices.items(), key=lambda kv: (kv[1], len(kv[0]), kv[0]))

    def to_list(self) -> list[dict]:
        return [{"simplex": list(s), "birth": b} for s, b in self.ordered()]

    @classmethod
    def from_list(cls, records: Iterable[dict]) -> "FilteredComplex":
        return cls({tuple(r["simplex"]): r["birth"] for r in records})

    @classmethod
    def constant(cls, simplices: Iterable[Sequence[int]], value: float = 0.0) -> "FilteredComplex":
        fc = cls()
        for s in simplices:
            fc.insert(s, value)
        return fc


class Interval(NamedTuple):
    dim: int
    birth: float
    death: float

    @property
    def zero_length(self) -> bool:
        return self.birth == self.death

    @property
    def infinite(self) -> bool:
        return self.death == INF


@dataclass
class Barcode:
    intervals: list[Interval] = field(default_factory=list)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def in_dim(self, dim: int) -> list[Interval]:
        return [iv for iv in self.intervals if iv.dim == dim]

    def sorted(self) -> list[Interval]:
        return sorted(self.intervals, key=lambda iv: (iv.dim, iv.birth, iv.death))

    def to_csv(self) -> str:
        lines = ["dim,birth,death"]
        for iv in self.sorted():
            death = "inf" if iv.infinite else repr(float(iv.death))
            lines.append(f"{iv.dim},{float(iv.birth)!r},{death}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Barcode":
        rows = [r for r in text.strip().splitlines() if r and not r.startswith("#")][1:]
        out = []
        for row in rows:
            d, b, e = row.split(",")
            out.append(Interval(int(d), float(b), INF if e == "inf" else float(e)))
        return cls(out)


def reduce(filtered: FilteredComplex) -> Barcode:
    """Persistence pairs by left-to-right column reduction over Z/2.

    Simplices are ordered by (birth, dimension, vertex ids). Columns are
    Python integers used as bit sets, so adding two columns is an XOR.
    Zero-length intervals are kept.
    """
    filtered.check_monotone()
    order = filtered.ordered()
    position = {s: i for i, (s, _) in enumerate(order)}
    reduced: dict[int, int] = {}
    pivot_owner: dict[int, int] = {}
    paired: set[int] = set()
    intervals = []
    for j, (simplex, birth) in enumerate(order):
        col = 0
        for f in faces(simplex):
            col ^= 1 << position[f]
        while col:
            owner = pivot_owner.get(col.bit_length() - 1)
            if owner is None:
                break
            col ^= reduced[owner]
        if col:
            low = col.bit_length() - 1
            pivot_owner[low] = j
            reduced[j] = col
            paired.update((low, j))
            lower, lower_birth = order[low]
            intervals.append(Interval(len(lower) - 1, lower_birth, birth))
    for i, (simplex, birth) in enumerate(order):
        if i not in paired:
            intervals.append(Interval(len(simplex) - 1, birth, INF))
    return Barcode(sorted(intervals, key=lambda iv: (iv.dim, iv.birth, iv.death)))


def betti_at(barcode: Barcode, t: float, dim: int) -> int:
    return sum(1 for iv in barcode.intervals if iv.dim == dim and iv.birth <= t < iv.death)


@dataclass
class BettiCurve:
    dim: int
    samples: list[tuple[float, int]]

    def value_ranges(self) -> dict[int, list[tuple[float, float]]]:
        """Maximal runs of consecutive samples sharing a Betti value, as (first, last) scale."""
        runs: dict[int, list[tuple[float, float]]] = {}
        start = None
        for i, (scale, beta) in enumerate(self.samples):
            if start is None or beta != self.samples[i - 1][1]:
                start = scale
            last = i + 1 == len(self.samples) or self.samples[i + 1][1] != beta
            if last:
                runs.setdefault(beta, []).append((start, scale))
        return runs

    def longest_range(self, target: int) -> tuple[float, float] | None:
        runs = self.value_ranges().get(target)
        if not runs:
            return None
        return max(runs, key=lambda r: (r[1] - r[0], -r[0]))


def betti_curve(barcode: Barcode, dim: int, scales: Sequence[float]) -> BettiCurve:
    scales = [float(s) for s in scales]
    if any(b < a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be sorted ascending")
    return BettiCurve(dim, [(s, betti_at(barcode, s, dim)) for s in scales])


def betti_numbers(simplices: Iterable[Sequence[int]], up_to_dim: int = 2) -> list[int]:
    """Betti numbers of an unfiltered complex via reduction of its constant filtration."""
    fc = FilteredComplex.constant(simplices)
    bars = reduce(fc)
    return [betti_at(bars, 0.0, p) for p in range(up_to_dim + 1)]


def rank_gf2(matrix: np.ndarray) -> int:
    """Rank over Z/2 by dense Gaussian elimination."""
    m = np.array(matrix, dtype=np.uint8) & 1
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivot = np.flatnonzero(m[rank:, c])
        if len(pivot) == 0:
            continue
        p = rank + pivot[0]
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
        hits = np.flatnonzero(m[:, c])
        hits = hits[hits != rank]
        m[hits] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def boundary_matrix(simplices: Iterable[tuple[int, ...]], dim: int) -> np.ndarray:
    """Z/2 boundary matrix from ``dim``-simplices to ``dim - 1``-simplices."""
    simplices = set(simplices)
    rows = sorted(s for s in simplices if len(s) == dim)
    cols = sorted(s for s in simplices if len(s) == dim + 1)
    index = {s: i for i, s in enumerate(rows)}
    m = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    for j, s in enumerate(cols):
        for f in faces(s):
            m[index[f], j] = 1
    return m


def oracle_betti(simplices: Iterable[Sequence[int]], up_to_dim: int = 2) -> list[int]:
    """Betti numbers as ``dim ker d_p - rank d_{p+1}``, independent of ``reduce``."""
    cells = {canonical(s) for s in simplices}
    counts = [sum(1 for s in cells if len(s) == p + 1) for p in range(up_to_dim + 2)]
    ranks = [0] * (up_to_dim + 3)
    for p in range(1, up_to_dim + 2):
        if counts[p] and counts[p - 1]:
            ranks[p] = rank_gf2(boundary_matrix(cells, p))
    return [counts[p] - ranks[p] - ranks[p + 1] for p in range(up_to_dim + 1)]

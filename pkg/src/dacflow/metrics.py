"""Connectivity growth / activity rate coordinates, dynamical classes and
the log-binned activity-connectivity density map.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import EmptyInput
from .ingest import UserAggregate


class DynClass(str, Enum):
    COMMON = "common"
    BROADCASTER = "broadcaster"
    INFLUENTIAL = "influential"
    HIDDEN_INFLUENTIAL = "hidden_influential"


# Quadrant order used for every per-class report.
CLASS_ORDER = (
    DynClass.COMMON,
    DynClass.BROADCASTER,
    DynClass.INFLUENTIAL,
    DynClass.HIDDEN_INFLUENTIAL,
)


class DacPoint(NamedTuple):
    user: str
    x: float
    y: float


def connectivity_growth(agg: UserAggregate) -> float:
    """Follower-gain rate over friend-gain rate, both shifted by one.

    ``agg`` must be finalized so that ``activity_days`` is set.
    """
    t = agg.activity_days
    df = (agg.f_max - agg.f_min) / t
    dF = (agg.F_max - agg.F_min) / t
    return (1.0 + df) / (1.0 + dF)


def activity_rate(agg: UserAggregate) -> float:
    return (1.0 + agg.m) / (1.0 + agg.M)


def filter_active(aggs: Iterable[UserAggregate]) -> list:
    """Keep users who both mentioned someone and were mentioned at least once."""
    return [a for a in aggs if a.m >= 1 and a.M >= 1]


def classify(x: float, y: float) -> DynClass:
    # Values exactly at 1 go to the high side.
    if x >= 1.0:
        return DynClass.INFLUENTIAL if y >= 1.0 else DynClass.BROADCASTER
    return DynClass.HIDDEN_INFLUENTIAL if y >= 1.0 else DynClass.COMMON


def dac_points(aggs: Iterable[UserAggregate]) -> list:
    return [DacPoint(a.user, connectivity_growth(a), activity_rate(a)) for a in aggs]


def classify_points(points: Iterable[DacPoint]) -> dict:
    return {p.user: classify(p.x, p.y) for p in points}


def class_counts(classes: dict) -> dict:
    counts = Counter(classes.values())
    return {c: counts.get(c, 0) for c in CLASS_ORDER}


# ---------------------------------------------------------------- DAC grid

DEFAULT_BINS = 40
PAD_FRACTION = 0.01
DEGENERATE_HALF_WIDTH = 0.01  # log10 units, used when all values coincide


@dataclass
class DacGrid:
    log_x_edges: np.ndarray
    log_y_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    n_points: int

    @property
    def x_edges(self) -> np.ndarray:
        return 10.0 ** self.log_x_edges

    @property
    def y_edges(self) -> np.ndarray:
        return 10.0 ** self.log_y_edges

    def cell_areas(self) -> np.ndarray:
        return np.outer(np.diff(self.log_x_edges), np.diff(self.log_y_edges))

    def total_mass(self) -> float:
        return math.fsum((self.density * self.cell_areas()).ravel())

    def rows(self):
        """Yield ``(x_lo, x_hi, y_lo, y_hi, density, count)`` with x varying slowest."""
        xe, ye = self.x_edges, self.y_edges
        for i in range(len(xe) - 1):
            for j in range(len(ye) - 1):
                yield (float(xe[i]), float(xe[i + 1]), float(ye[j]), float(ye[j + 1]),
                       float(self.density[i, j]), int(self.counts[i, j]))


def log_edges(values: np.ndarray, n_bins: int) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    pad = PAD_FRACTION * span if span > 0 else DEGENERATE_HALF_WIDTH
    return np.linspace(lo - pad, hi + pad, n_bins + 1)


def bin_index(log_values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Index ``i`` with ``edges[i] <= v < edges[i+1]``."""
    idx = np.searchsorted(edges, log_values, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def grid_counts(log_x, log_y, x_edges, y_edges) -> np.ndarray:
    """Per-cell counts; partial counts from point shards can simply be summed."""
    nx, ny = len(x_edges) - 1, len(y_edges) - 1
    flat = bin_index(log_x, x_edges) * ny + bin_index(log_y, y_edges)
    return np.bincount(flat, minlength=nx * ny).reshape(nx, ny)


def _as_xy(points) -> tuple:
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]
    pts = list(points)
    if pts and isinstance(pts[0], DacPoint):
        return (np.fromiter((p.x for p in pts), float, len(pts)),
                np.fromiter((p.y for p in pts), float, len(pts)))
    arr = np.asarray(pts, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def dac_grid(points, nx: int = DEFAULT_BINS, ny: int = DEFAULT_BINS) -> DacGrid:
    """Log-binned joint density of (x, y), normalized per unit log-area.

    Edges span the data range in log10 space, widened by 1% of the span on
    each side so the extreme points fall strictly inside.
    """
    if nx < 2 or ny < 2:
        raise ValueError("dac_grid needs at least 2 bins per axis")
    x, y = _as_xy(points)
    n = len(x)
    if n == 0:
        raise EmptyInput("dac_grid needs at least one point")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("coordinates must be positive")
    lx, ly = np.log10(x), np.log10(y)
    xe, ye = log_edges(lx, nx), log_edges(ly, ny)
    counts = grid_counts(lx, ly, xe, ye)
    area = np.outer(np.diff(xe), np.diff(ye))
    density = counts / (n * area)
    return DacGrid(xe, ye, counts, density, n)


# ---------------------------------------------------------- distributions


@dataclass(frozen=True)
class ProbDist:
    """Normalized frequency distribution keyed by observed value (ascending)."""

    probs: dict
    n: int

    def __getitem__(self, value) -> float:
        return self.probs[value]

    def __len__(self) -> int:
        return len(self.probs)

    def items(self):
        return self.probs.items()

    def total(self) -> float:
        return math.fsum(self.probs.values())


def probability_distribution(values: Iterable[int]) -> ProbDist:
    counts = Counter(values)
    n = sum(counts.values())
    if n == 0:
        raise EmptyInput("probability_distribution of an empty sample")
    return ProbDist({v: counts[v] / n for v in sorted(counts)}, n)


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    q1: float
    q2: float
    q3: float


def quartiles(values: Sequence[float]) -> tuple:
    """Median-of-halves quartiles; the median itself is left out of both halves."""
    xs = sorted(values)
    n = len(xs)
    if n == 1:
        return xs[0], xs[0], xs[0]
    half = n // 2
    lower, upper = xs[:half], xs[half + (n % 2):]
    return statistics.median(lower), statistics.median(xs), statistics.median(upper)


def summary_stats(values: Iterable[float]) -> SummaryStats:
    xs = list(values)
    if not xs:
        raise EmptyInput("summary_stats of an empty sample")
    q1, q2, q3 = quartiles(xs)
    return SummaryStats(statistics.fmean(xs), statistics.pstdev(xs), q1, q2, q3)

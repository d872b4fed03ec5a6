"""Spatial density queries: ground truth, grid-based answers, random
workloads, and the average relative error metric.

A query asks how many users fall inside a rectangle. A grid answers it by
visiting every cell: disjoint cells contribute nothing, contained cells
contribute their whole estimate, and partially overlapping cells contribute
their estimate scaled by the overlapped fraction of the cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .collection import DensityEstimate
from .errors import ParameterError
from .geo import Dataset, GeoRect, Grid

__all__ = [
    "DensityQuery",
    "QueryWorkload",
    "ground_truth",
    "ground_truth_many",
    "noisy_answer",
    "noisy_answer_many",
    "generate_workload",
    "aqe",
]

_AREA_RTOL = 1e-9


@dataclass(frozen=True)
class DensityQuery:
    """How many users are located within ``rect``?"""

    rect: GeoRect


@dataclass(frozen=True, eq=False)
class QueryWorkload:
    """A batch of equally sized random queries covering a fraction ``rho`` of
    the domain's area each."""

    queries: tuple
    rho: float
    gamma: int
    domain: GeoRect

    def __post_init__(self):
        if len(self.queries) != self.gamma:
            raise ParameterError(f"{len(self.queries)} queries, gamma={self.gamma}")
        target = self.rho * self.domain.area
        for q in self.queries:
            if not self.domain.contains_rect(q.rect):
                raise ParameterError("query exceeds the domain")
            if abs(q.rect.area - target) > _AREA_RTOL * target:
                raise ParameterError(
                    f"query area {q.rect.area!r} differs from rho * domain area"
                )


def _axis_mask(coords: np.ndarray, lo: float, hi: float, closed_hi: bool) -> np.ndarray:
    upper = coords <= hi if closed_hi else coords < hi
    return (coords >= lo) & upper


def ground_truth(users: Dataset, q: DensityQuery) -> int:
    """Exact number of user locations inside the query rectangle.

    Uses the same edge convention as cell membership: min edges included, max
    edges excluded unless they lie on the domain's max boundary.
    """
    r = q.rect
    d = users.domain
    mask = _axis_mask(users.lons, r.min_lon, r.max_lon, r.max_lon == d.max_lon)
    mask &= _axis_mask(users.lats, r.min_lat, r.max_lat, r.max_lat == d.max_lat)
    return int(np.count_nonzero(mask))


def ground_truth_many(users: Dataset, queries: Sequence[DensityQuery]) -> np.ndarray:
    """Exact answers for a whole workload.

    Sorts locations by longitude once, then evaluates each query on its
    longitude band only; equivalent to ``ground_truth`` query by query.
    """
    order = np.argsort(users.lons, kind="stable")
    lons = users.lons[order]
    lats = users.lats[order]
    d = users.domain
    out = np.empty(len(queries), dtype=np.int64)
    for i, q in enumerate(queries):
        r = q.rect
        lo = np.searchsorted(lons, r.min_lon, side="left")
        hi_side = "right" if r.max_lon == d.max_lon else "left"
        hi = np.searchsorted(lons, r.max_lon, side=hi_side)
        band = lats[lo:hi]
        out[i] = np.count_nonzero(
            _axis_mask(band, r.min_lat, r.max_lat, r.max_lat == d.max_lat)
        )
    return out


def _overlap_fractions(grid: Grid, rect: GeoRect) -> np.ndarray:
    x0, y0, x1, y1 = grid.cell_bounds()
    w = np.minimum(x1, rect.max_lon) - np.maximum(x0, rect.min_lon)
    h = np.minimum(y1, rect.max_lat) - np.maximum(y0, rect.min_lat)
    inter = np.clip(w, 0.0, None) * np.clip(h, 0.0, None)
    return inter / ((x1 - x0) * (y1 - y0))


def noisy_answer(grid: Grid, est: DensityEstimate, q: DensityQuery) -> float:
    """Grid-based answer: sum of cell estimates weighted by the overlapped
    fraction of each cell (1 for contained cells, 0 for disjoint ones)."""
    if est.grid is not grid and len(est.phi) != len(grid.cells):
        raise ParameterError("estimate does not match the grid")
    return float(np.dot(est.phi, _overlap_fractions(grid, q.rect)))


def noisy_answer_many(
    grid: Grid, est: DensityEstimate, queries: Sequence[DensityQuery]
) -> np.ndarray:
    """Grid-based answers for a whole workload."""
    if est.grid is not grid and len(est.phi) != len(grid.cells):
        raise ParameterError("estimate does not match the grid")
    x0, y0, x1, y1 = grid.cell_bounds()
    inv_area = 1.0 / ((x1 - x0) * (y1 - y0))
    out = np.empty(len(queries))
    for i, q in enumerate(queries):
        r = q.rect
        w = np.minimum(x1, r.max_lon) - np.maximum(x0, r.min_lon)
        h = np.minimum(y1, r.max_lat) - np.maximum(y0, r.min_lat)
        frac = np.clip(w, 0.0, None) * np.clip(h, 0.0, None) * inv_area
        out[i] = np.dot(est.phi, frac)
    return out


def generate_workload(
    domain: GeoRect, rho: float, gamma: int, rng: np.random.Generator
) -> QueryWorkload:
    """Random queries of area rho * area(domain), fully inside the domain.

    Each query keeps the domain's aspect ratio (sides scaled by sqrt(rho)) so
    the size parameter stays meaningful for elongated domains.
    """
    if not 0.0 < rho <= 1.0:
        raise ParameterError(f"rho must lie in (0, 1], got {rho}")
    if gamma < 1:
        raise ParameterError(f"gamma must be >= 1, got {gamma}")
    if rho == 1.0:
        queries = tuple(DensityQuery(domain) for _ in range(gamma))
        return QueryWorkload(queries, rho, gamma, domain)
    side = math.sqrt(rho)
    qw = domain.width * side
    qh = domain.height * side
    x0s = rng.uniform(domain.min_lon, domain.max_lon - qw, size=gamma)
    y0s = rng.uniform(domain.min_lat, domain.max_lat - qh, size=gamma)
    queries = []
    for x0, y0 in zip(x0s, y0s):
        x1 = min(x0 + qw, domain.max_lon)
        y1 = min(y0 + qh, domain.max_lat)
        queries.append(DensityQuery(GeoRect(float(x0), float(y0), float(x1), float(y1))))
    return QueryWorkload(tuple(queries), rho, gamma, domain)


def aqe(truths, answers, n_users: int) -> float:
    """Mean relative error over a workload, denominator floored at 2% of the
    population to keep near-empty queries from dominating."""
    truths = np.asarray(truths, dtype=np.float64)
    answers = np.asarray(answers, dtype=np.float64)
    if truths.shape != answers.shape or truths.ndim != 1:
        raise ParameterError("truths and answers must be equal-length 1-d arrays")
    if len(truths) < 1:
        raise ParameterError("need at least one query")
    if n_users < 1:
        raise ParameterError("n_users must be >= 1")
    bound = 0.02 * n_users
    return float(np.mean(np.abs(answers - truths) / np.maximum(truths, bound)))

"""Two-phase adaptive grids: even per-cell subdivision and the
neighbor-weighted uneven variant.

Both pipelines spend the first phase estimating densities on a coarse uniform
lattice with one split of the user population, derive per-cell subdivision
factors from those densities, and collect final densities from the remaining
users on the refined grid. The uneven variant additionally skews each cell's
split point toward denser neighbors, on the premise that a cell's interior
distribution mimics its surroundings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .collection import DensityEstimate, collect
from .errors import ParameterError
from .geo import (
    Dataset,
    GeoRect,
    Grid,
    GridCell,
    GridKind,
    assemble_two_level,
    build_uniform,
)

__all__ = [
    "AdaptiveGridParams",
    "NeighborDensities",
    "compute_g1",
    "compute_g2",
    "neighbor_densities",
    "compute_hsplit",
    "compute_vsplit",
    "subdivide_privag",
    "subdivide_aag",
    "build_privag",
    "build_aag",
]

# Split fractions are kept inside [0.1, 0.9] so no sliver subcell can collapse
# the partition; density inputs are floored at 1.0 before forming ratios.
SPLIT_FRACTION_MIN = 0.1
SPLIT_FRACTION_MAX = 0.9
_DENSITY_FLOOR = 1.0


@dataclass(frozen=True)
class AdaptiveGridParams:
    """Knobs of the two-phase pipelines.

    ``alpha_g1`` feeds the first-level lattice size, ``alpha_g2`` the
    per-cell subdivision factor, ``sigma`` is the fraction of users spent on
    phase 1.
    """

    epsilon: float
    alpha_g1: float
    alpha_g2: float
    sigma: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not (0 < self.alpha_g1 <= 1 and 0 < self.alpha_g2 <= 1):
            raise ParameterError("alphas must lie in (0, 1]")
        if not 0 < self.sigma < 1:
            raise ParameterError(f"sigma must lie in (0, 1), got {self.sigma}")

    @classmethod
    def for_privag(
        cls, epsilon: float, alpha: float = 0.02, sigma: float = 0.2
    ) -> "AdaptiveGridParams":
        return cls(epsilon=epsilon, alpha_g1=0.02, alpha_g2=alpha, sigma=sigma)

    @classmethod
    def for_aag(
        cls, epsilon: float, alpha: float = 0.25, sigma: float = 0.5
    ) -> "AdaptiveGridParams":
        # The initial lattice keeps the conservative alpha; the larger alpha
        # only drives per-cell subdivision.
        return cls(epsilon=epsilon, alpha_g1=0.02, alpha_g2=alpha, sigma=sigma)


@dataclass(frozen=True)
class NeighborDensities:
    """Estimated densities of a cell's four axis neighbors; None marks a
    neighbor that does not exist (edge/corner cells before filling)."""

    left: Optional[float]
    right: Optional[float]
    up: Optional[float]
    down: Optional[float]


def compute_g1(n_users: int, epsilon: float, alpha_g1: float) -> int:
    """First-level lattice dimension, at least 1."""
    if n_users < 1:
        raise ParameterError("n_users must be >= 1")
    e = math.exp(epsilon)
    raw = math.sqrt(2.0 * alpha_g1 * (e - 1.0) * math.sqrt(n_users / e))
    return max(1, int(round(raw)))


def compute_g2(
    density_fraction: float,
    epsilon: float,
    alpha_g2: float,
    sigma: float,
    n_users: int,
) -> int:
    """Per-cell subdivision dimension from the cell's share of phase-1 users.

    ``density_fraction`` is the phase-1 estimate normalized by the phase-1
    sub-population size; it is clamped into [0, 1] before use.
    """
    if n_users < 1:
        raise ParameterError("n_users must be >= 1")
    f = min(max(density_fraction, 0.0), 1.0)
    if f <= 0.0:
        return 1
    e = math.exp(epsilon)
    raw = math.sqrt(
        2.0 * alpha_g2 * f * (e - 1.0) * math.sqrt((1.0 - sigma) * n_users / e)
    )
    return max(1, int(round(raw)))


def neighbor_densities(
    g1_grid: Grid, phi: np.ndarray, cell_index: int
) -> NeighborDensities:
    """Densities of the four axis neighbors in a uniform lattice.

    Missing neighbors (edges, corners) take the cell's own density, so split
    ratios degrade gracefully instead of treating the outside as empty.
    """
    if g1_grid.index is None or any(s is not None for s in g1_grid.index.sub_edges):
        raise ParameterError("neighbor lookup needs an unsubdivided uniform grid")
    n_cols = g1_grid.index.n_cols
    n_rows = g1_grid.index.n_rows
    if len(phi) != n_cols * n_rows:
        raise ParameterError("one density per cell required")
    if not 0 <= cell_index < n_cols * n_rows:
        raise ParameterError(f"cell index {cell_index} out of range")
    row, col = divmod(cell_index, n_cols)
    own = float(phi[cell_index])

    def at(r: int, c: int) -> float:
        if 0 <= r < n_rows and 0 <= c < n_cols:
            return float(phi[r * n_cols + c])
        return own

    return NeighborDensities(
        left=at(row, col - 1),
        right=at(row, col + 1),
        up=at(row + 1, col),
        down=at(row - 1, col),
    )


def _split_fraction(toward: Optional[float], away: Optional[float]) -> float:
    if toward is None or away is None:
        raise ParameterError("neighbor densities must be filled before splitting")
    a = max(float(away), _DENSITY_FLOOR)
    t = max(float(toward), _DENSITY_FLOOR)
    frac = t / (a + t)
    return min(max(frac, SPLIT_FRACTION_MIN), SPLIT_FRACTION_MAX)


def compute_hsplit(neigh: NeighborDensities, cell_width: float) -> float:
    """Vertical dividing line, as a distance from the cell's left edge.

    A denser right neighbor pushes the line right, leaving a thinner subcell
    on the dense side.
    """
    return _split_fraction(neigh.right, neigh.left) * cell_width


def compute_vsplit(neigh: NeighborDensities, cell_height: float) -> float:
    """Horizontal dividing line, as a distance from the cell's top edge.

    A denser bottom neighbor yields a smaller bottom subcell.
    """
    return _split_fraction(neigh.down, neigh.up) * cell_height


def _even_lattice_edges(rect: GeoRect, g2: int) -> Tuple[np.ndarray, np.ndarray]:
    return (
        np.linspace(rect.min_lon, rect.max_lon, g2 + 1),
        np.linspace(rect.min_lat, rect.max_lat, g2 + 1),
    )


def _uneven_lattice_edges(
    rect: GeoRect, g2: int, hsplit: float, vsplit: float
) -> Tuple[np.ndarray, np.ndarray]:
    if not 0.0 < hsplit < rect.width:
        raise ParameterError(f"hsplit {hsplit} outside (0, {rect.width})")
    if not 0.0 < vsplit < rect.height:
        raise ParameterError(f"vsplit {vsplit} outside (0, {rect.height})")
    # Odd factors above 2 are rounded up to even so the quadrants tile into
    # exactly g2 x g2 subcells.
    even = g2 if g2 % 2 == 0 else g2 + 1
    k = even // 2
    xs = rect.min_lon + hsplit
    ys = rect.max_lat - vsplit
    x_edges = np.concatenate(
        [np.linspace(rect.min_lon, xs, k + 1), np.linspace(xs, rect.max_lon, k + 1)[1:]]
    )
    y_edges = np.concatenate(
        [np.linspace(rect.min_lat, ys, k + 1), np.linspace(ys, rect.max_lat, k + 1)[1:]]
    )
    return x_edges, y_edges


def _cells_from_edges(
    parent: GridCell, x_edges: np.ndarray, y_edges: np.ndarray
) -> List[GridCell]:
    cells = []
    cid = 0
    for row in range(len(y_edges) - 1):
        for col in range(len(x_edges) - 1):
            rect = GeoRect(
                float(x_edges[col]),
                float(y_edges[row]),
                float(x_edges[col + 1]),
                float(y_edges[row + 1]),
            )
            cells.append(GridCell(cid, rect, parent.id))
            cid += 1
    return cells


def subdivide_privag(cell: GridCell, g2: int) -> List[GridCell]:
    """Even g2 x g2 subdivision; g2 = 1 leaves the cell untouched."""
    if g2 < 1:
        raise ParameterError(f"g2 must be >= 1, got {g2}")
    if g2 == 1:
        return [cell]
    return _cells_from_edges(cell, *_even_lattice_edges(cell.rect, g2))


def subdivide_aag(cell: GridCell, g2: int, hsplit: float, vsplit: float) -> List[GridCell]:
    """Uneven subdivision: four quadrants at (hsplit, vsplit), each quadrant
    evenly tiled so the total is g2 x g2 (odd g2 > 2 rounds up to even)."""
    if g2 < 1:
        raise ParameterError(f"g2 must be >= 1, got {g2}")
    if g2 == 1:
        return [cell]
    return _cells_from_edges(
        cell, *_uneven_lattice_edges(cell.rect, g2, hsplit, vsplit)
    )


def _split_population(
    users: Dataset, sigma: float, rng: np.random.Generator
) -> Tuple[Dataset, Dataset]:
    n = len(users)
    if n < 2:
        raise ParameterError("two-phase collection needs at least 2 users")
    n1 = min(max(int(round(sigma * n)), 1), n - 1)
    perm = rng.permutation(n)
    return users.take(perm[:n1]), users.take(perm[n1:])


def _phase_one(
    users: Dataset, params: AdaptiveGridParams, rng: np.random.Generator
) -> Tuple[Dataset, Dataset, Grid, DensityEstimate]:
    group1, group2 = _split_population(users, params.sigma, rng)
    g1 = compute_g1(len(users), params.epsilon, params.alpha_g1)
    lattice = build_uniform(users.domain, g1, g1)
    est1 = collect(group1, lattice, params.epsilon, rng)
    return group1, group2, lattice, est1


def build_privag(
    users: Dataset, params: AdaptiveGridParams, rng: np.random.Generator
) -> Tuple[Grid, DensityEstimate]:
    """Two-phase pipeline with even per-cell subdivision.

    Returns the refined grid and a density estimate rescaled to the full
    population.
    """
    group1, group2, lattice, est1 = _phase_one(users, params, rng)
    n1 = len(group1)
    subs = []
    for k, cell in enumerate(lattice.cells):
        g2 = compute_g2(
            est1.phi[k] / n1, params.epsilon, params.alpha_g2, params.sigma, len(users)
        )
        subs.append(None if g2 == 1 else _even_lattice_edges(cell.rect, g2))
    idx = lattice.index
    grid = assemble_two_level(users.domain, GridKind.PRIVAG, idx.x_edges, idx.y_edges, subs)
    est = collect(group2, grid, params.epsilon, rng).rescaled(len(users))
    return grid, est


def build_aag(
    users: Dataset, params: AdaptiveGridParams, rng: np.random.Generator
) -> Tuple[Grid, DensityEstimate]:
    """Two-phase pipeline with neighbor-weighted uneven subdivision."""
    group1, group2, lattice, est1 = _phase_one(users, params, rng)
    n1 = len(group1)
    subs = []
    for k, cell in enumerate(lattice.cells):
        g2 = compute_g2(
            est1.phi[k] / n1, params.epsilon, params.alpha_g2, params.sigma, len(users)
        )
        if g2 == 1:
            subs.append(None)
            continue
        neigh = neighbor_densities(lattice, est1.phi, k)
        hsplit = compute_hsplit(neigh, cell.rect.width)
        vsplit = compute_vsplit(neigh, cell.rect.height)
        subs.append(_uneven_lattice_edges(cell.rect, g2, hsplit, vsplit))
    idx = lattice.index
    grid = assemble_two_level(users.domain, GridKind.AAG, idx.x_edges, idx.y_edges, subs)
    est = collect(group2, grid, params.epsilon, rng).rescaled(len(users))
    return grid, est

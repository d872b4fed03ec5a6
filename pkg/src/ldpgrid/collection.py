"""End-to-end collection of per-cell densities from a user population.

Every user discretizes their location to a cell of the given grid, runs the
user-side frequency-oracle protocol once, and the server debiases the
support counts into one density estimate per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geo import Dataset, Grid, locate_points
from .olh import LdpParams, estimate_all, report_many

__all__ = ["DensityEstimate", "collect", "true_densities"]


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Estimated user count per grid cell.

    ``n_users`` is the population the estimate refers to. Values are raw
    debiased estimates: they can be negative and are never clamped here.
    """

    grid: Grid
    phi: np.ndarray
    n_users: int

    def __post_init__(self):
        phi = np.ascontiguousarray(self.phi, dtype=np.float64)
        object.__setattr__(self, "phi", phi)
        if len(phi) != len(self.grid.cells):
            raise ParameterError(
                f"{len(phi)} estimates for {len(self.grid.cells)} cells"
            )
        if not np.all(np.isfinite(phi)):
            raise ParameterError("densities must be finite")
        if self.n_users < 1:
            raise ParameterError("n_users must be >= 1")

    def rescaled(self, population: int) -> "DensityEstimate":
        """Project estimates from the collected sub-population onto a larger
        population it was sampled from."""
        if population < 1:
            raise ParameterError("population must be >= 1")
        factor = population / self.n_users
        return DensityEstimate(self.grid, self.phi * factor, population)


def collect(
    users: Dataset, grid: Grid, epsilon: float, rng: np.random.Generator
) -> DensityEstimate:
    """Run the full grid collection protocol on a user population.

    Each user contributes exactly one report at budget ``epsilon``.
    """
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if len(users) < 1:
        raise ParameterError("cannot collect from an empty population")
    cell_ids = locate_points(grid, users.lons, users.lats)
    params = LdpParams.from_epsilon(epsilon)
    reports = report_many(cell_ids, len(grid.cells), params, rng)
    phi = estimate_all(reports, len(grid.cells), len(users), params)
    return DensityEstimate(grid, phi, len(users))


def true_densities(users: Dataset, grid: Grid) -> np.ndarray:
    """Exact per-cell user counts (the ground truth ``collect`` estimates)."""
    cell_ids = locate_points(grid, users.lons, users.lats)
    return np.bincount(cell_ids, minlength=len(grid.cells)).astype(np.int64)

"""Dataset ingestion and synthetic generators.

Real location data arrives as one ``lon,lat`` row per user; rows outside the
requested bounding box are dropped. Synthetic generators provide seeded
uniform and Gaussian-mixture populations for desk-scale experiments.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ParameterError
from .geo import Dataset, GeoRect

__all__ = [
    "GOWALLA_BBOX",
    "PORTO_BBOX",
    "PRESET_BBOXES",
    "UNIT_SQUARE",
    "CLUSTERED_COMPONENTS",
    "CsvSource",
    "SyntheticSource",
    "DatasetSpec",
    "load_csv",
    "write_csv",
    "synth_uniform",
    "synth_gaussian_mixture",
    "synth_clustered",
    "realize",
]

log = logging.getLogger(__name__)

# Continental-US slice of the Gowalla check-ins and the Porto city box.
GOWALLA_BBOX = GeoRect(-124.26, 25.45, -71.87, 47.44)
PORTO_BBOX = GeoRect(-8.691294, 41.138351, -8.552009, 41.185935)

# The Tokyo check-in file is used at its own extent, hence no preset box.
PRESET_BBOXES = {
    "gowalla": GOWALLA_BBOX,
    "porto": PORTO_BBOX,
    "foursquare": None,
}

UNIT_SQUARE = GeoRect(0.0, 0.0, 1.0, 1.0)

# Default clustered benchmark population: three tight urban-style hotspots on
# the unit square, two of them straddling coarse-lattice lines so adaptive
# refinement has real structure to resolve.
CLUSTERED_COMPONENTS = (
    ((0.773, 0.608), 0.025, 0.12),
    ((0.601, 0.415), 0.026, 0.43),
    ((0.189, 0.795), 0.021, 0.45),
)


@dataclass(frozen=True)
class CsvSource:
    path: str


@dataclass(frozen=True)
class SyntheticSource:
    kind: str  # "uniform" or "clustered"
    n_users: int
    seed: int

    def __post_init__(self):
        if self.kind not in ("uniform", "clustered"):
            raise ParameterError(f"unknown synthetic kind {self.kind!r}")
        if self.n_users < 1:
            raise ParameterError("n_users must be >= 1")


@dataclass(frozen=True)
class DatasetSpec:
    """Where a dataset comes from and which bounding box applies.

    ``bbox`` may be None, in which case a CSV source uses the file's own
    extent and a synthetic source uses the unit square.
    """

    name: str
    bbox: Optional[GeoRect]
    source: Union[CsvSource, SyntheticSource]


def load_csv(path: str, bbox: Optional[GeoRect] = None) -> Tuple[Dataset, int]:
    """Read ``lon,lat`` rows, drop rows outside ``bbox``.

    A non-numeric first row is treated as a header. Returns the dataset and
    the number of dropped rows; the dataset's domain is ``bbox`` (or the
    file's extent when no box is given).
    """
    lons = []
    lats = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ParameterError(f"{path}:{lineno}: expected 'lon,lat', got {row!r}")
            try:
                lon = float(row[0])
                lat = float(row[1])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ParameterError(
                    f"{path}:{lineno}: expected two decimal fields, got {row!r}"
                ) from None
            lons.append(lon)
            lats.append(lat)
    if not lons:
        raise ParameterError(f"{path}: no location rows")
    lon_arr = np.array(lons)
    lat_arr = np.array(lats)
    if bbox is None:
        bbox = GeoRect(
            float(lon_arr.min()),
            float(lat_arr.min()),
            float(lon_arr.max()),
            float(lat_arr.max()),
        )
    keep = (
        (lon_arr >= bbox.min_lon)
        & (lon_arr <= bbox.max_lon)
        & (lat_arr >= bbox.min_lat)
        & (lat_arr <= bbox.max_lat)
    )
    dropped = int(len(lon_arr) - np.count_nonzero(keep))
    if dropped == len(lon_arr):
        raise ParameterError(f"{path}: no rows inside the bounding box")
    log.info("%s: kept %d rows, dropped %d", path, len(lon_arr) - dropped, dropped)
    return Dataset(bbox, lon_arr[keep], lat_arr[keep]), dropped


def write_csv(dataset: Dataset, path: str) -> None:
    """Write a dataset back out as ``lon,lat`` rows with a header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lon", "lat"])
        for lon, lat in zip(dataset.lons, dataset.lats):
            writer.writerow([repr(float(lon)), repr(float(lat))])


def synth_uniform(domain: GeoRect, n_users: int, seed: int) -> Dataset:
    """Users placed independently and uniformly over the domain."""
    if n_users < 1:
        raise ParameterError("n_users must be >= 1")
    rng = np.random.default_rng(seed)
    lons = rng.uniform(domain.min_lon, domain.max_lon, size=n_users)
    lats = rng.uniform(domain.min_lat, domain.max_lat, size=n_users)
    return Dataset(domain, lons, lats)


def synth_gaussian_mixture(
    domain: GeoRect,
    n_users: int,
    components: Sequence[Tuple[Tuple[float, float], float, float]],
    seed: int,
) -> Dataset:
    """Users drawn from a mixture of isotropic Gaussians, rejection-sampled
    into the domain.

    ``components`` holds ((lon, lat), std, weight) triples; weights must sum
    to 1.
    """
    if n_users < 1:
        raise ParameterError("n_users must be >= 1")
    if not components:
        raise ParameterError("at least one mixture component required")
    weights = np.array([w for _, _, w in components], dtype=np.float64)
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ParameterError(f"component weights sum to {weights.sum()}, expected 1")
    centers = np.array([c for c, _, _ in components], dtype=np.float64)
    stds = np.array([s for _, s, _ in components], dtype=np.float64)
    rng = np.random.default_rng(seed)
    comp = rng.choice(len(components), size=n_users, p=weights)
    lons = np.empty(n_users)
    lats = np.empty(n_users)
    pending = np.arange(n_users)
    for _ in range(1000):
        k = comp[pending]
        lons[pending] = centers[k, 0] + stds[k] * rng.standard_normal(len(pending))
        lats[pending] = centers[k, 1] + stds[k] * rng.standard_normal(len(pending))
        outside = (
            (lons[pending] < domain.min_lon)
            | (lons[pending] > domain.max_lon)
            | (lats[pending] < domain.min_lat)
            | (lats[pending] > domain.max_lat)
        )
        pending = pending[outside]
        if len(pending) == 0:
            return Dataset(domain, lons, lats)
    raise ParameterError(
        "rejection sampling failed to place all users; components lie too far "
        "outside the domain"
    )


def synth_clustered(n_users: int, seed: int, domain: GeoRect = UNIT_SQUARE) -> Dataset:
    """The default clustered benchmark population.

    Sampled on the unit square and mapped affinely onto ``domain``, so the
    same seed gives the same relative geometry everywhere.
    """
    unit = synth_gaussian_mixture(UNIT_SQUARE, n_users, CLUSTERED_COMPONENTS, seed)
    if domain == UNIT_SQUARE:
        return unit
    lons = domain.min_lon + unit.lons * domain.width
    lats = domain.min_lat + unit.lats * domain.height
    return Dataset(domain, np.clip(lons, domain.min_lon, domain.max_lon),
                   np.clip(lats, domain.min_lat, domain.max_lat))


def realize(spec: DatasetSpec) -> Tuple[Dataset, int]:
    """Materialize a dataset spec; returns (dataset, dropped row count)."""
    if isinstance(spec.source, CsvSource):
        return load_csv(spec.source.path, spec.bbox)
    src = spec.source
    domain = spec.bbox if spec.bbox is not None else UNIT_SQUARE
    if src.kind == "uniform":
        return synth_uniform(domain, src.n_users, src.seed), 0
    return synth_clustered(src.n_users, src.seed, domain), 0

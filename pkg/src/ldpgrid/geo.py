"""Rectangles, grids, and point-in-cell discretization.

A grid is a decomposition of a rectangular domain into disjoint rectangular
cells. Cell membership follows one convention everywhere: a cell contains its
min edges and excludes its max edges, except that cells touching the domain's
max boundary also contain it. This makes every in-domain point belong to
exactly one cell.

Coordinates are plain planar values (decimal degrees for real data); areas are
computed in raw coordinate units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "GeoRect",
    "Location",
    "GridCell",
    "GridKind",
    "GridIndex",
    "Grid",
    "Dataset",
    "intersection_area",
    "build_uniform",
    "assemble_two_level",
    "locate",
    "locate_points",
]

_AREA_RTOL = 1e-9


@dataclass(frozen=True)
class GeoRect:
    """Axis-aligned rectangle, min corner strictly below max corner."""

    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float

    def __post_init__(self):
        vals = (self.min_lon, self.min_lat, self.max_lon, self.max_lat)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"rectangle bounds must be finite, got {vals}")
        if not (self.min_lon < self.max_lon and self.min_lat < self.max_lat):
            raise ParameterError(
                f"degenerate rectangle: ({self.min_lon}, {self.min_lat}) .. "
                f"({self.max_lon}, {self.max_lat})"
            )

    @property
    def width(self) -> float:
        return self.max_lon - self.min_lon

    @property
    def height(self) -> float:
        return self.max_lat - self.min_lat

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains_rect(self, other: "GeoRect") -> bool:
        return (
            self.min_lon <= other.min_lon
            and self.min_lat <= other.min_lat
            and other.max_lon <= self.max_lon
            and other.max_lat <= self.max_lat
        )


@dataclass(frozen=True)
class Location:
    """One user's position: a (lon, lat) pair."""

    lon: float
    lat: float

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise ParameterError(f"non-finite location ({self.lon}, {self.lat})")


def intersection_area(a: GeoRect, b: GeoRect) -> float:
    """Area of the overlap of two rectangles; 0.0 when they are disjoint."""
    w = min(a.max_lon, b.max_lon) - max(a.min_lon, b.min_lon)
    if w <= 0.0:
        return 0.0
    h = min(a.max_lat, b.max_lat) - max(a.min_lat, b.min_lat)
    if h <= 0.0:
        return 0.0
    return w * h


class GridKind(str, Enum):
    UNIFORM = "uniform"
    PRIVAG = "privag"
    AAG = "aag"


@dataclass(frozen=True)
class GridCell:
    """One cell of a grid.

    ``parent_id`` is the index of the coarse (level-1) cell this subcell was
    carved from; it is None for cells that are themselves level-1 cells.
    """

    id: int
    rect: GeoRect
    parent_id: Optional[int] = None


@dataclass(frozen=True, eq=False)
class GridIndex:
    """Lookup structure for grids built as a coarse lattice with per-cell
    rectilinear subdivisions.

    ``x_edges``/``y_edges`` are the level-1 column/row boundaries. Entry ``p``
    of ``sub_edges`` holds the (x, y) edge arrays of parent ``p``'s
    subdivision, or None when the parent is itself a final cell. ``offsets``
    maps a parent to the id of its first final cell.
    """

    x_edges: np.ndarray
    y_edges: np.ndarray
    offsets: np.ndarray
    sub_edges: tuple

    @property
    def n_cols(self) -> int:
        return len(self.x_edges) - 1

    @property
    def n_rows(self) -> int:
        return len(self.y_edges) - 1


def _cell_contains(rect: GeoRect, domain: GeoRect, lon: float, lat: float) -> bool:
    """Membership under the min-inclusive / max-exclusive convention with
    closure on the domain's max boundary."""
    ok_lon = rect.min_lon <= lon and (
        lon < rect.max_lon or (rect.max_lon == domain.max_lon and lon == rect.max_lon)
    )
    if not ok_lon:
        return False
    return rect.min_lat <= lat and (
        lat < rect.max_lat or (rect.max_lat == domain.max_lat and lat == rect.max_lat)
    )


@dataclass(frozen=True, eq=False)
class Grid:
    """Disjoint rectangular decomposition of a domain.

    Cell ids are dense 0..len-1 in list order. ``index`` is an optional
    acceleration structure; grids assembled by this module always carry one,
    hand-built grids may omit it (lookups then fall back to a scan).
    """

    domain: GeoRect
    cells: tuple
    kind: GridKind
    index: Optional[GridIndex] = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.cells) == 0:
            raise ParameterError("a grid needs at least one cell")
        area = 0.0
        for i, cell in enumerate(self.cells):
            if cell.id != i:
                raise ParameterError(f"cell ids must be dense, got {cell.id} at {i}")
            if not self.domain.contains_rect(cell.rect):
                raise ParameterError(f"cell {i} exceeds the domain")
            area += cell.rect.area
        if abs(area - self.domain.area) > _AREA_RTOL * self.domain.area:
            raise ParameterError(
                f"cells cover {area!r}, domain area is {self.domain.area!r}"
            )

    def __len__(self) -> int:
        return len(self.cells)

    def cell_bounds(self):
        """Cell rectangles as four aligned arrays (min_lon, min_lat, max_lon, max_lat)."""
        n = len(self.cells)
        out = np.empty((4, n))
        for i, c in enumerate(self.cells):
            r = c.rect
            out[0, i] = r.min_lon
            out[1, i] = r.min_lat
            out[2, i] = r.max_lon
            out[3, i] = r.max_lat
        return out[0], out[1], out[2], out[3]

    def level_one_edges(self):
        """Column/row edges of the coarse lattice this grid was built on.

        For uniform grids these are the grid's own edges. Requires an index.
        """
        if self.index is None:
            raise ParameterError("grid carries no index")
        return self.index.x_edges.copy(), self.index.y_edges.copy()


@dataclass(frozen=True, eq=False)
class Dataset:
    """A user population: one location per user, all inside ``domain``."""

    domain: GeoRect
    lons: np.ndarray
    lats: np.ndarray

    def __post_init__(self):
        lons = np.ascontiguousarray(self.lons, dtype=np.float64)
        lats = np.ascontiguousarray(self.lats, dtype=np.float64)
        object.__setattr__(self, "lons", lons)
        object.__setattr__(self, "lats", lats)
        if lons.ndim != 1 or lons.shape != lats.shape:
            raise ParameterError("lons and lats must be equal-length 1-d arrays")
        if len(lons) < 1:
            raise ParameterError("a dataset needs at least one user")
        if not (np.all(np.isfinite(lons)) and np.all(np.isfinite(lats))):
            raise ParameterError("locations must be finite")
        d = self.domain
        inside = (
            (lons >= d.min_lon)
            & (lons <= d.max_lon)
            & (lats >= d.min_lat)
            & (lats <= d.max_lat)
        )
        if not np.all(inside):
            bad = int(np.flatnonzero(~inside)[0])
            raise DomainError(
                f"location {bad} ({lons[bad]}, {lats[bad]}) is outside the domain"
            )
        lons.setflags(write=False)
        lats.setflags(write=False)

    def __len__(self) -> int:
        return len(self.lons)

    @property
    def locations(self):
        """Locations as objects; intended for small datasets and tests."""
        return [Location(float(x), float(y)) for x, y in zip(self.lons, self.lats)]

    @classmethod
    def from_locations(cls, domain: GeoRect, locations: Iterable[Location]) -> "Dataset":
        pts = list(locations)
        return cls(
            domain,
            np.array([p.lon for p in pts], dtype=np.float64),
            np.array([p.lat for p in pts], dtype=np.float64),
        )

    def take(self, indices) -> "Dataset":
        """Sub-population at the given user indices (order preserved)."""
        return Dataset(self.domain, self.lons[indices], self.lats[indices])


def _lattice_cells(x_edges, y_edges, first_id: int, parent_id: Optional[int]):
    cells = []
    n_cols = len(x_edges) - 1
    n_rows = len(y_edges) - 1
    cid = first_id
    for row in range(n_rows):
        for col in range(n_cols):
            rect = GeoRect(
                float(x_edges[col]),
                float(y_edges[row]),
                float(x_edges[col + 1]),
                float(y_edges[row + 1]),
            )
            cells.append(GridCell(cid, rect, parent_id))
            cid += 1
    return cells


def build_uniform(domain: GeoRect, n_cols: int, n_rows: int) -> Grid:
    """Uniform n_cols x n_rows grid of equal cells, ids row-major from the
    bottom-left corner."""
    if n_cols < 1 or n_rows < 1:
        raise ParameterError(f"grid dimensions must be >= 1, got {n_cols}x{n_rows}")
    x_edges = np.linspace(domain.min_lon, domain.max_lon, n_cols + 1)
    y_edges = np.linspace(domain.min_lat, domain.max_lat, n_rows + 1)
    cells = _lattice_cells(x_edges, y_edges, 0, None)
    n = n_cols * n_rows
    index = GridIndex(
        x_edges=x_edges,
        y_edges=y_edges,
        offsets=np.arange(n + 1, dtype=np.int64),
        sub_edges=(None,) * n,
    )
    return Grid(domain, tuple(cells), GridKind.UNIFORM, index)


def assemble_two_level(
    domain: GeoRect,
    kind: GridKind,
    x_edges: np.ndarray,
    y_edges: np.ndarray,
    sub_edges: Sequence,
) -> Grid:
    """Assemble a grid from a coarse lattice plus per-parent subdivisions.

    ``sub_edges[p]`` is either None (parent p stays a single cell) or a pair
    of edge arrays describing a rectilinear subdivision of parent p. Cells are
    appended in parent order, each parent's subcells row-major.
    """
    n_parents = (len(x_edges) - 1) * (len(y_edges) - 1)
    if len(sub_edges) != n_parents:
        raise ParameterError("one sub_edges entry per level-1 cell required")
    cells = []
    offsets = np.empty(n_parents + 1, dtype=np.int64)
    parent_rects = _lattice_cells(x_edges, y_edges, 0, None)
    for p in range(n_parents):
        offsets[p] = len(cells)
        sub = sub_edges[p]
        if sub is None:
            cells.append(GridCell(len(cells), parent_rects[p].rect, None))
        else:
            sx, sy = sub
            cells.extend(_lattice_cells(sx, sy, len(cells), p))
    offsets[n_parents] = len(cells)
    index = GridIndex(
        x_edges=np.asarray(x_edges, dtype=np.float64),
        y_edges=np.asarray(y_edges, dtype=np.float64),
        offsets=offsets,
        sub_edges=tuple(sub_edges),
    )
    return Grid(domain, tuple(cells), kind, index)


def _axis_index(edges: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Interval index per coordinate under the membership convention.

    Values equal to the last edge are folded into the last interval (domain
    max closure); callers must have range-checked the coordinates.
    """
    idx = np.searchsorted(edges, coords, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def locate_points(grid: Grid, lons, lats) -> np.ndarray:
    """Cell id for each (lon, lat); raises DomainError for out-of-domain points."""
    lons = np.ascontiguousarray(lons, dtype=np.float64)
    lats = np.ascontiguousarray(lats, dtype=np.float64)
    d = grid.domain
    inside = (
        (lons >= d.min_lon)
        & (lons <= d.max_lon)
        & (lats >= d.min_lat)
        & (lats <= d.max_lat)
    )
    if not np.all(inside):
        bad = int(np.flatnonzero(~inside)[0])
        raise DomainError(
            f"point ({lons[bad]}, {lats[bad]}) is outside the grid domain"
        )
    if grid.index is None:
        return _locate_by_scan(grid, lons, lats)

    idx = grid.index
    col = _axis_index(idx.x_edges, lons)
    row = _axis_index(idx.y_edges, lats)
    parent = row * idx.n_cols + col
    if all(sub is None for sub in idx.sub_edges):
        return parent

    out = np.empty(len(lons), dtype=np.int64)
    order = np.argsort(parent, kind="stable")
    sorted_parent = parent[order]
    starts = np.searchsorted(sorted_parent, np.arange(len(idx.sub_edges) + 1))
    for p in range(len(idx.sub_edges)):
        lo, hi = starts[p], starts[p + 1]
        if lo == hi:
            continue
        sel = order[lo:hi]
        sub = idx.sub_edges[p]
        if sub is None:
            out[sel] = idx.offsets[p]
        else:
            sx, sy = sub
            c = _axis_index(sx, lons[sel])
            r = _axis_index(sy, lats[sel])
            out[sel] = idx.offsets[p] + r * (len(sx) - 1) + c
    return out


def _locate_by_scan(grid: Grid, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
    out = np.full(len(lons), -1, dtype=np.int64)
    for cell in grid.cells:
        r = cell.rect
        lon_ok = (lons >= r.min_lon) & (
            (lons < r.max_lon)
            | ((r.max_lon == grid.domain.max_lon) & (lons == r.max_lon))
        )
        lat_ok = (lats >= r.min_lat) & (
            (lats < r.max_lat)
            | ((r.max_lat == grid.domain.max_lat) & (lats == r.max_lat))
        )
        hit = lon_ok & lat_ok & (out < 0)
        out[hit] = cell.id
    if np.any(out < 0):
        bad = int(np.flatnonzero(out < 0)[0])
        raise DomainError(
            f"point ({lons[bad]}, {lats[bad]}) not covered by any cell"
        )
    return out


def locate(grid: Grid, loc: Location) -> int:
    """Id of the unique cell containing ``loc``."""
    return int(locate_points(grid, [loc.lon], [loc.lat])[0])

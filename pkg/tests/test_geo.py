import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldpgrid import (
    Dataset,
    DomainError,
    GeoRect,
    Grid,
    GridKind,
    Location,
    ParameterError,
    build_uniform,
    intersection_area,
    locate,
    locate_points,
)

UNIT = GeoRect(0.0, 0.0, 1.0, 1.0)


def contains_by_convention(rect, domain, lon, lat):
    """Independent statement of the membership rule: min edges in, max edges
    out, except on the domain's max boundary."""
    lon_ok = rect.min_lon <= lon and (
        lon < rect.max_lon or (rect.max_lon == domain.max_lon and lon == rect.max_lon)
    )
    lat_ok = rect.min_lat <= lat and (
        lat < rect.max_lat or (rect.max_lat == domain.max_lat and lat == rect.max_lat)
    )
    return lon_ok and lat_ok


class TestGeoRect:
    def test_degenerate_rejected(self):
        with pytest.raises(ParameterError):
            GeoRect(0.0, 0.0, 0.0, 1.0)
        with pytest.raises(ParameterError):
            GeoRect(0.0, 2.0, 1.0, 1.0)
        with pytest.raises(ParameterError):
            GeoRect(0.0, 0.0, float("nan"), 1.0)

    def test_dimensions(self):
        r = GeoRect(-1.0, 2.0, 3.0, 4.0)
        assert r.width == 4.0
        assert r.height == 2.0
        assert r.area == 8.0


class TestIntersectionArea:
    def test_disjoint(self):
        a = GeoRect(0, 0, 1, 1)
        b = GeoRect(2, 2, 3, 3)
        assert intersection_area(a, b) == 0.0

    def test_contained(self):
        inner = GeoRect(0.25, 0.25, 0.5, 0.5)
        assert intersection_area(inner, UNIT) == pytest.approx(inner.area, rel=1e-15)

    def test_partial_overlap_hand_value(self):
        a = GeoRect(0, 0, 2, 2)
        b = GeoRect(1, 1, 3, 3)
        assert intersection_area(a, b) == pytest.approx(1.0, rel=1e-15)

    def test_shared_edge_is_zero(self):
        a = GeoRect(0, 0, 1, 1)
        b = GeoRect(1, 0, 2, 1)
        assert intersection_area(a, b) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=8, max_size=8))
    def test_symmetric_and_bounded(self, vals):
        xs = sorted(vals[:2]), sorted(vals[2:4])
        ys = sorted(vals[4:6]), sorted(vals[6:8])
        if xs[0][0] == xs[0][1] or xs[1][0] == xs[1][1]:
            return
        if ys[0][0] == ys[0][1] or ys[1][0] == ys[1][1]:
            return
        a = GeoRect(xs[0][0], ys[0][0], xs[0][1], ys[0][1])
        b = GeoRect(xs[1][0], ys[1][0], xs[1][1], ys[1][1])
        area = intersection_area(a, b)
        assert area == intersection_area(b, a)
        assert 0.0 <= area <= min(a.area, b.area) + 1e-12


class TestBuildUniform:
    def test_single_cell_equals_domain(self):
        g = build_uniform(UNIT, 1, 1)
        assert len(g.cells) == 1
        assert g.cells[0].rect == UNIT

    def test_3x2_unit_cells(self):
        g = build_uniform(GeoRect(0, 0, 3, 2), 3, 2)
        assert len(g.cells) == 6
        for c in g.cells:
            assert c.rect.area == pytest.approx(1.0, rel=1e-12)

    def test_9x9_cell_count(self):
        assert len(build_uniform(UNIT, 9, 9).cells) == 81

    def test_bad_dimensions(self):
        with pytest.raises(ParameterError):
            build_uniform(UNIT, 0, 3)
        with pytest.raises(ParameterError):
            build_uniform(UNIT, 3, -1)

    def test_row_major_ids(self):
        g = build_uniform(UNIT, 3, 2)
        # id = row * n_cols + col, rows from the bottom
        assert g.cells[0].rect.min_lon == 0.0 and g.cells[0].rect.min_lat == 0.0
        assert g.cells[2].rect.max_lon == 1.0 and g.cells[2].rect.min_lat == 0.0
        assert g.cells[3].rect.min_lon == 0.0 and g.cells[3].rect.max_lat == 1.0


class TestLocate:
    def test_interior_point(self):
        g = build_uniform(UNIT, 2, 2)
        assert locate(g, Location(0.25, 0.25)) == 0

    def test_shared_corner_goes_up_right(self):
        g = build_uniform(UNIT, 2, 2)
        assert locate(g, Location(0.5, 0.5)) == 3

    def test_domain_max_corner_via_exhaustive_membership(self):
        domain = GeoRect(0, 0, 3, 3)
        g = build_uniform(domain, 3, 3)
        loc = Location(3.0, 3.0)
        holders = [
            c.id
            for c in g.cells
            if contains_by_convention(c.rect, domain, loc.lon, loc.lat)
        ]
        assert holders == [8]
        assert locate(g, loc) == 8

    def test_outside_domain(self):
        g = build_uniform(UNIT, 2, 2)
        with pytest.raises(DomainError):
            locate(g, Location(1.5, 0.5))
        with pytest.raises(DomainError):
            locate_points(g, [0.1, -0.2], [0.1, 0.1])

    def test_scan_fallback_matches_indexed(self):
        indexed = build_uniform(GeoRect(-2, 1, 4, 5), 5, 3)
        bare = Grid(indexed.domain, indexed.cells, GridKind.UNIFORM, index=None)
        rng = np.random.default_rng(3)
        lons = rng.uniform(-2, 4, 500)
        lats = rng.uniform(1, 5, 500)
        assert np.array_equal(
            locate_points(indexed, lons, lats), locate_points(bare, lons, lats)
        )


class TestPartitionInvariants:
    def test_locate_partition_10k_points(self, built_grids):
        rng = np.random.default_rng(17)
        for grid in built_grids.values():
            d = grid.domain
            lons = rng.uniform(d.min_lon, d.max_lon, 10_000)
            lats = rng.uniform(d.min_lat, d.max_lat, 10_000)
            ids = locate_points(grid, lons, lats)
            for cid in np.unique(ids):
                r = grid.cells[cid].rect
                sel = ids == cid
                assert np.all(lons[sel] >= r.min_lon) and np.all(lons[sel] <= r.max_lon)
                assert np.all(lats[sel] >= r.min_lat) and np.all(lats[sel] <= r.max_lat)

    def test_disjoint_and_area_complete(self, built_grids):
        for grid in built_grids.values():
            cells = grid.cells
            areas = sum(c.rect.area for c in cells)
            assert areas == pytest.approx(grid.domain.area, rel=1e-9)
            overlap = 0.0
            for i in range(len(cells)):
                for j in range(i + 1, len(cells)):
                    overlap += intersection_area(cells[i].rect, cells[j].rect)
            assert overlap <= 1e-12

    def test_locate_single_valued_on_shared_edges(self, built_grids):
        for grid in built_grids.values():
            d = grid.domain
            # points on interior cell corners are still owned by exactly one cell
            probe = []
            for c in grid.cells[:50]:
                r = c.rect
                if r.max_lon < d.max_lon and r.max_lat < d.max_lat:
                    probe.append((r.max_lon, r.max_lat))
                probe.append((r.min_lon, r.min_lat))
            for lon, lat in probe:
                holders = [
                    c.id
                    for c in grid.cells
                    if contains_by_convention(c.rect, d, lon, lat)
                ]
                assert len(holders) == 1
                assert locate(grid, Location(lon, lat)) == holders[0]


class TestGridValidation:
    def test_non_dense_ids_rejected(self):
        g = build_uniform(UNIT, 2, 1)
        cells = (g.cells[1], g.cells[0])
        with pytest.raises(ParameterError):
            Grid(UNIT, cells, GridKind.UNIFORM)

    def test_area_deficit_rejected(self):
        g = build_uniform(UNIT, 2, 1)
        with pytest.raises(ParameterError):
            Grid(UNIT, (g.cells[0],), GridKind.UNIFORM)


class TestDataset:
    def test_rejects_outside_points(self):
        with pytest.raises(DomainError):
            Dataset(UNIT, np.array([0.5, 1.2]), np.array([0.5, 0.5]))

    def test_rejects_empty(self):
        with pytest.raises(ParameterError):
            Dataset(UNIT, np.array([]), np.array([]))

    def test_take_and_locations(self):
        ds = Dataset(UNIT, np.array([0.1, 0.6, 0.9]), np.array([0.2, 0.7, 0.4]))
        sub = ds.take([2, 0])
        assert len(sub) == 2
        assert sub.locations == [Location(0.9, 0.4), Location(0.1, 0.2)]

    def test_boundary_points_allowed(self):
        ds = Dataset(UNIT, np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        assert len(ds) == 2

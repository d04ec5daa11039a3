from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trajsim.core import (
    MBR,
    Dataset,
    GeoPoint,
    GridCell,
    GridSpec,
    Segment,
    Trajectory,
    mbr_of,
    point_distance,
    point_segment_distance,
    polygon_area,
    segment_distance,
    segment_intersection,
    to_grid,
)
from trajsim.errors import DegeneratePolygonError, EmptyTrajectoryError, ParameterError

coord = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)


def seg(a, b):
    return Segment(GeoPoint(*a), GeoPoint(*b))


@pytest.mark.parametrize(
    "p,q,want",
    [((0, 0), (3, 4), 5.0), ((1, 1), (1, 1), 0.0), ((1, 1), (1, 2), 1.0)],
)
def test_point_distance_examples(p, q, want):
    assert point_distance(p, q) == pytest.approx(want)
    assert point_distance(GeoPoint(*p), GeoPoint(*q)) == pytest.approx(want)


def test_point_segment_distance_examples():
    assert point_segment_distance((0, 1), seg((-1, 0), (1, 0))) == pytest.approx(1.0)
    assert point_segment_distance((0.5, 0), seg((-1, 0), (1, 0))) == 0.0
    assert point_segment_distance((2, 2), seg((0, 0), (1, 0))) == pytest.approx(math.sqrt(5))


def test_point_segment_matches_dense_sampling():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p, a, b = rng.uniform(-5, 5, size=(3, 2))
        s = np.linspace(0, 1, 100_001)[:, None]
        brute = np.hypot(*(a + s * (b - a) - p).T).min()
        assert point_segment_distance(tuple(p), seg(a, b)) == pytest.approx(brute, abs=1e-4)


@given(point, point, point)
def test_point_segment_bounded_by_endpoints(p, a, b):
    d = point_segment_distance(p, seg(a, b))
    assert 0.0 <= d <= min(point_distance(p, a), point_distance(p, b)) + 1e-9


def test_degenerate_segment_is_point():
    assert point_segment_distance((3, 4), seg((0, 0), (0, 0))) == pytest.approx(5.0)


def test_segment_intersection_examples():
    x = segment_intersection(seg((0, 0), (2, 2)), seg((0, 2), (2, 0)))
    assert (x.lat, x.lon) == pytest.approx((1, 1))
    assert segment_intersection(seg((0, 0), (1, 0)), seg((0, 1), (1, 1))) is None
    x = segment_intersection(seg((0, 0), (2, 0)), seg((1, -1), (1, 3)))
    assert (x.lat, x.lon) == pytest.approx((1, 0))


def test_segment_intersection_disjoint_and_collinear_overlap():
    assert segment_intersection(seg((0, 0), (1, 1)), seg((5, 0), (6, -3))) is None
    x = segment_intersection(seg((0, 0), (2, 0)), seg((1, 0), (3, 0)))
    assert (x.lat, x.lon) == pytest.approx((1.5, 0))


def test_segment_distance_crossing_is_zero():
    assert segment_distance(seg((0, 0), (2, 2)), seg((0, 2), (2, 0))) == 0.0
    assert segment_distance(seg((0, 0), (1, 0)), seg((0, 1), (1, 1))) == pytest.approx(1.0)


def test_polygon_area_examples():
    assert polygon_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == pytest.approx(1.0)
    assert polygon_area([(0, 0), (4, 0), (0, 3)]) == pytest.approx(6.0)
    assert polygon_area([(0, 0), (1, 1), (2, 2)]) == 0.0
    with pytest.raises(DegeneratePolygonError):
        polygon_area([(0, 0), (1, 1)])


@given(st.lists(point, min_size=3, max_size=9), st.integers(0, 8))
def test_polygon_area_rotation_and_reversal(vs, k):
    k %= len(vs)
    base = polygon_area(vs)
    assert polygon_area(vs[k:] + vs[:k]) == pytest.approx(base, rel=1e-9, abs=1e-6)
    assert polygon_area(vs[::-1]) == pytest.approx(base, rel=1e-9, abs=1e-6)


def test_mbr_examples(q1):
    assert mbr_of(Trajectory("a", [(1, 2)])) == MBR(1, 2, 1, 2)
    assert mbr_of(q1) == MBR(1, 0, 7, 4)
    assert mbr_of(Trajectory("b", [(0, 5), (3, 1)])) == MBR(0, 1, 3, 5)


def test_mbr_rejects_inverted_bounds():
    with pytest.raises(ParameterError):
        MBR(2, 0, 1, 1)


def test_to_grid_examples():
    g = GridSpec()
    assert to_grid(Trajectory(1, [(0, 0)]), g) == [GridCell(0, 0)]
    assert to_grid(Trajectory(1, [(0.1, 0.1), (0.2, 0.2)]), g) == [GridCell(0, 0)]


def test_to_grid_point_mode_uses_floor():
    g = GridSpec(origin_lat=1.0, origin_lon=-1.0, cell_size_lat=2.0, cell_size_lon=0.5)
    t = Trajectory(1, [(1.0, -1.0), (2.9, -0.6), (3.0, -0.5)])
    assert to_grid(t, g, traverse=False) == [GridCell(0, 0), GridCell(1, 1)]


def test_to_grid_traversal_is_connected(q1, q2):
    for t in (q1, q2):
        cells = to_grid(t, GridSpec())
        for a, b in zip(cells, cells[1:]):
            assert max(abs(a.ix - b.ix), abs(a.iy - b.iy)) == 1


@pytest.mark.xfail(strict=True, reason="worked example counts 12 cells; rasterizing the polyline gives 14")
def test_to_grid_running_example_cell_count(q1):
    assert len(to_grid(q1, GridSpec())) == 12


def test_gridspec_rejects_nonpositive_size():
    with pytest.raises(ParameterError):
        GridSpec(cell_size_lat=0)


def test_trajectory_invariants():
    with pytest.raises(EmptyTrajectoryError):
        Trajectory(1, [])
    with pytest.raises(ParameterError):
        Trajectory(1, [(0, 0), (1, 1)], times=[2.0, 1.0])
    with pytest.raises(ParameterError):
        Trajectory.from_points(1, [(0, 0, 1.0), (1, 1)])
    with pytest.raises(ParameterError):
        Trajectory(1, [(0, math.nan)])
    t = Trajectory.from_points(1, [GeoPoint(0, 0, 1.0), GeoPoint(1, 1, 1.0)])
    assert t.has_times and len(t) == 2
    assert t.points[1] == GeoPoint(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        t.coords[0, 0] = 5.0


def test_trajectory_derived_values(q1):
    assert len(q1.segments()) == 4
    assert q1.path_length() == pytest.approx(math.sqrt(13) + math.sqrt(17) + math.sqrt(8) + math.sqrt(2))
    assert q1.subset([0, 4]).points[1].lat == 7.0
    assert q1.with_id("x").id == "x"


def test_dataset_order_and_lookup():
    ds = Dataset([Trajectory("b", [(0, 0)]), Trajectory(3, [(1, 1)]), Trajectory(1, [(2, 2)])])
    assert ds.ids == [1, 3, "b"]
    assert [t.id for t in ds] == [1, 3, "b"]
    assert 3 in ds and ds[3].coords[0, 0] == 1.0
    assert ds.index_of("b") == 2
    with pytest.raises(ParameterError):
        Dataset([Trajectory(1, [(0, 0)]), Trajectory(1, [(1, 1)])])


def test_dataset_equality_ignores_construction_order():
    a = Trajectory(1, [(0, 0)])
    b = Trajectory(2, [(1, 1)])
    assert Dataset([a, b]) == Dataset([b, a])

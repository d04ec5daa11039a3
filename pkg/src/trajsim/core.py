"""Geometric primitives and trajectory containers.

Coordinates are planar: ``lat`` and ``lon`` are treated as Cartesian axes and
all distances are plain Euclidean distances on that plane.  No projection or
geodesic correction is applied, so datasets in degrees are compared in degree
units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import DegeneratePolygonError, EmptyTrajectoryError, ParameterError

EPS = 1e-9

TrajId = Union[int, str]


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float
    t: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ParameterError(f"non-finite coordinate ({self.lat}, {self.lon})")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.lat, self.lon)


@dataclass(frozen=True)
class Segment:
    start: GeoPoint
    end: GeoPoint

    @property
    def length(self) -> float:
        return point_distance(self.start, self.end)


@dataclass(frozen=True)
class MBR:
    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def __post_init__(self):
        if self.min_lat > self.max_lat or self.min_lon > self.max_lon:
            raise ParameterError(f"inverted bounding box {self}")

    @property
    def center(self) -> tuple[float, float]:
        return ((self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0)

    def union(self, other: MBR) -> MBR:
        return MBR(
            min(self.min_lat, other.min_lat),
            min(self.min_lon, other.min_lon),
            max(self.max_lat, other.max_lat),
            max(self.max_lon, other.max_lon),
        )


@dataclass(frozen=True)
class GridSpec:
    origin_lat: float = 0.0
    origin_lon: float = 0.0
    cell_size_lat: float = 1.0
    cell_size_lon: float = 1.0

    def __post_init__(self):
        if not (self.cell_size_lat > 0 and self.cell_size_lon > 0):
            raise ParameterError("grid cell sizes must be positive")

    def cell_of(self, lat: float, lon: float) -> GridCell:
        # half-open cells: a point on a boundary belongs to the higher cell
        return GridCell(
            math.floor((lat - self.origin_lat) / self.cell_size_lat),
            math.floor((lon - self.origin_lon) / self.cell_size_lon),
        )


@dataclass(frozen=True, order=True)
class GridCell:
    ix: int
    iy: int


def _as_coord_array(points) -> np.ndarray:
    rows = []
    for p in points:
        if isinstance(p, GeoPoint):
            rows.append((p.lat, p.lon))
        else:
            rows.append((float(p[0]), float(p[1])))
    arr = np.asarray(rows, dtype=np.float64).reshape(-1, 2)
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """An ordered sequence of planar points with optional timestamps.

    ``coords`` is an ``(n, 2)`` float64 array of ``(lat, lon)`` rows and
    ``times`` is either ``None`` or a length-``n`` array.  Both arrays are
    made read-only on construction.
    """

    id: TrajId | None
    coords: np.ndarray
    times: np.ndarray | None = field(default=None)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64).reshape(-1, 2)
        if len(coords) == 0:
            raise EmptyTrajectoryError(f"trajectory {self.id!r} has no points")
        if not np.all(np.isfinite(coords)):
            raise ParameterError(f"trajectory {self.id!r} has non-finite coordinates")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if self.times is not None:
            times = np.array(self.times, dtype=np.float64).reshape(-1)
            if len(times) != len(coords):
                raise ParameterError("times and coords differ in length")
            if len(times) > 1 and np.any(np.diff(times) < 0):
                raise ParameterError(f"trajectory {self.id!r} has decreasing timestamps")
            times.setflags(write=False)
            object.__setattr__(self, "times", times)

    @classmethod
    def from_points(cls, id: TrajId | None, points: Iterable) -> Trajectory:
        """Build from GeoPoints or ``(lat, lon[, t])`` tuples.

        Timestamps must be given for every point or for none of them.
        """
        pts = list(points)
        times = []
        for p in pts:
            t = p.t if isinstance(p, GeoPoint) else (p[2] if len(p) > 2 else None)
            times.append(t)
        has_t = [t is not None for t in times]
        if any(has_t) and not all(has_t):
            raise ParameterError("timestamps must be present on all points or none")
        return cls(id, _as_coord_array(pts), times if all(has_t) and pts else None)

    def __len__(self) -> int:
        return len(self.coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        if self.id != other.id or not np.array_equal(self.coords, other.coords):
            return False
        if self.times is None or other.times is None:
            return self.times is None and other.times is None
        return np.array_equal(self.times, other.times)

    def __hash__(self) -> int:
        return hash((self.id, len(self.coords)))

    def __repr__(self) -> str:
        return f"Trajectory(id={self.id!r}, n={len(self)})"

    @property
    def points(self) -> tuple[GeoPoint, ...]:
        ts = self.times if self.times is not None else [None] * len(self)
        return tuple(
            GeoPoint(float(lat), float(lon), None if t is None else float(t))
            for (lat, lon), t in zip(self.coords, ts)
        )

    @property
    def has_times(self) -> bool:
        return self.times is not None

    def segments(self) -> list[Segment]:
        pts = self.points
        return [Segment(a, b) for a, b in zip(pts, pts[1:])]

    def path_length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.coords, axis=0).T))) if len(self) > 1 else 0.0

    def with_id(self, new_id: TrajId) -> Trajectory:
        return Trajectory(new_id, self.coords, self.times)

    def subset(self, idx: Sequence[int]) -> Trajectory:
        idx = np.asarray(idx, dtype=np.intp)
        times = None if self.times is None else self.times[idx]
        return Trajectory(self.id, self.coords[idx], times)


def coords_of(t) -> np.ndarray:
    """Coordinate array of a Trajectory or of a plain point sequence."""
    if isinstance(t, Trajectory):
        return t.coords
    return _as_coord_array(t)


def _id_key(tid):
    # ints sort before strings so mixed datasets still have a total order
    return (0, tid, "") if isinstance(tid, int) else (1, 0, str(tid))


class Dataset:
    """Id-indexed collection of trajectories, iterated in ascending id order."""

    def __init__(self, trajectories: Iterable = ()):
        items = {}
        for t in trajectories:
            if t.id is None:
                raise ParameterError("dataset members need an id")
            if t.id in items:
                raise ParameterError(f"duplicate trajectory id {t.id!r}")
            items[t.id] = t
        self._ids = sorted(items, key=_id_key)
        self._items = items
        self.dropped = 0
        """Trajectories filtered out by the loader (too short)."""

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self) -> Iterator:
        return (self._items[i] for i in self._ids)

    def __getitem__(self, tid):
        return self._items[tid]

    def __contains__(self, tid) -> bool:
        return tid in self._items

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._ids == other._ids and all(self[i] == other[i] for i in self._ids)

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)})"

    @property
    def ids(self) -> list:
        return list(self._ids)

    def index_of(self, tid) -> int:
        return self._ids.index(tid)


def sort_ids(ids: Iterable) -> list:
    return sorted(ids, key=_id_key)


# ---------------------------------------------------------------------------
# geometry


def _xy(p) -> tuple[float, float]:
    if isinstance(p, GeoPoint):
        return p.lat, p.lon
    return float(p[0]), float(p[1])


def point_distance(p, q) -> float:
    """Euclidean distance between two points on the (lat, lon) plane."""
    (x1, y1), (x2, y2) = _xy(p), _xy(q)
    return math.hypot(x1 - x2, y1 - y2)


def _project_param(p, a, b) -> float:
    """Clamped parameter of the orthogonal projection of p onto segment a-b."""
    (px, py), (ax, ay), (bx, by) = p, a, b
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return 0.0
    t = ((px - ax) * dx + (py - ay) * dy) / l2
    return min(1.0, max(0.0, t))


def _point_seg_dist(p, a, b) -> float:
    t = _project_param(p, a, b)
    cx = a[0] + t * (b[0] - a[0])
    cy = a[1] + t * (b[1] - a[1])
    return math.hypot(p[0] - cx, p[1] - cy)


def point_segment_distance(p, s: Segment) -> float:
    """Minimum distance from ``p`` to the closed segment ``s``."""
    return _point_seg_dist(_xy(p), _xy(s.start), _xy(s.end))


def _cross(ox, oy, ax, ay, bx, by) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _intersection_xy(a, b, c, d):
    """Intersection of closed segments a-b and c-d as an (x, y) tuple, or None.

    Collinear overlaps return the midpoint of the overlapping part.
    """
    rx, ry = b[0] - a[0], b[1] - a[1]
    sx, sy = d[0] - c[0], d[1] - c[1]
    den = rx * sy - ry * sx
    qpx, qpy = c[0] - a[0], c[1] - a[1]
    scale = max(math.hypot(rx, ry) * math.hypot(sx, sy), 1.0)
    if abs(den) <= EPS * scale:
        if abs(qpx * ry - qpy * rx) > EPS * max(math.hypot(rx, ry), 1.0):
            return None  # parallel, not collinear
        rr = rx * rx + ry * ry
        if rr == 0.0:
            # a-b is a point
            if _point_seg_dist(a, c, d) <= EPS:
                return (a[0], a[1])
            return None
        t0 = (qpx * rx + qpy * ry) / rr
        t1 = t0 + (sx * rx + sy * ry) / rr
        lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
        if lo > hi + EPS:
            return None
        tm = (lo + hi) / 2.0
        return (a[0] + tm * rx, a[1] + tm * ry)
    t = (qpx * sy - qpy * sx) / den
    u = (qpx * ry - qpy * rx) / den
    if -EPS <= t <= 1 + EPS and -EPS <= u <= 1 + EPS:
        return (a[0] + t * rx, a[1] + t * ry)
    return None


def segment_intersection(a: Segment, b: Segment) -> GeoPoint | None:
    """Intersection point of two segments, ``None`` when they do not meet."""
    hit = _intersection_xy(_xy(a.start), _xy(a.end), _xy(b.start), _xy(b.end))
    return None if hit is None else GeoPoint(hit[0], hit[1])


def _seg_seg_dist(a, b, c, d) -> float:
    if _intersection_xy(a, b, c, d) is not None:
        return 0.0
    return min(
        _point_seg_dist(a, c, d),
        _point_seg_dist(b, c, d),
        _point_seg_dist(c, a, b),
        _point_seg_dist(d, a, b),
    )


def segment_distance(s1: Segment, s2: Segment) -> float:
    """Minimum distance between two closed segments (0 when they cross)."""
    return _seg_seg_dist(_xy(s1.start), _xy(s1.end), _xy(s2.start), _xy(s2.end))


def polygon_area(vertices: Sequence) -> float:
    """Absolute shoelace area of the closed polygon through ``vertices``."""
    pts = [_xy(v) for v in vertices]
    if len(pts) < 3:
        raise DegeneratePolygonError(f"polygon needs at least 3 vertices, got {len(pts)}")
    s = 0.0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def mbr_of(t) -> MBR:
    c = coords_of(t)
    if len(c) == 0:
        raise EmptyTrajectoryError("cannot bound an empty trajectory")
    lo, hi = c.min(axis=0), c.max(axis=0)
    return MBR(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def _traverse(a, b, g: GridSpec) -> list[tuple[int, int]]:
    """Cells visited by segment a-b, in order, stepping one cell at a time.

    A segment passing exactly through a grid corner steps diagonally, so
    the two side cells it only touches are not included.
    """
    ux = (a[0] - g.origin_lat) / g.cell_size_lat
    uy = (a[1] - g.origin_lon) / g.cell_size_lon
    vx = (b[0] - g.origin_lat) / g.cell_size_lat
    vy = (b[1] - g.origin_lon) / g.cell_size_lon
    cx, cy = math.floor(ux), math.floor(uy)
    ex, ey = math.floor(vx), math.floor(vy)
    dx, dy = vx - ux, vy - uy
    sx = 1 if ex > cx else -1
    sy = 1 if ey > cy else -1

    def next_t(u, c, d, step):
        if d == 0:
            return math.inf
        boundary = c + 1 if step > 0 else c
        return (boundary - u) / d

    cells = [(cx, cy)]
    nx, ny = abs(ex - cx), abs(ey - cy)
    while nx or ny:
        tx = next_t(ux, cx, dx, sx) if nx else math.inf
        ty = next_t(uy, cy, dy, sy) if ny else math.inf
        if abs(tx - ty) <= EPS:
            cx += sx
            cy += sy
            nx -= 1
            ny -= 1
        elif tx < ty:
            cx += sx
            nx -= 1
        else:
            cy += sy
            ny -= 1
        cells.append((cx, cy))
    return cells


def to_grid(t, g: GridSpec, traverse: bool = True) -> list[GridCell]:
    """Map a trajectory onto grid cells, collapsing consecutive repeats.

    With ``traverse`` (the default) every cell crossed by the polyline is
    included; otherwise only the cells holding sample points are.
    """
    c = coords_of(t)
    raw: list[tuple[int, int]] = []
    if traverse and len(c) > 1:
        for a, b in zip(c, c[1:]):
            raw.extend(_traverse(a, b, g))
    else:
        raw = [(gc.ix, gc.iy) for gc in (g.cell_of(x, y) for x, y in c)]
    out: list[GridCell] = []
    for ix, iy in raw:
        cell = GridCell(int(ix), int(iy))
        if not out or out[-1] != cell:
            out.append(cell)
    return out

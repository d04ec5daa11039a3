"""Free-space similarity measures (point based and segment based).

Every dynamic-programming measure fills its table bottom-up; nothing here
recurses, so trajectories of several thousand points are safe.  Index ``i``
in a table means "the first ``i`` points have been consumed", which is the
same thing as peeling the last point off with ``Head`` in the recursive
definitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import (
    GeoPoint,
    GridSpec,
    _intersection_xy,
    _point_seg_dist,
    _project_param,
    _seg_seg_dist,
    _xy,
    coords_of,
    polygon_area,
    to_grid,
)
from ..errors import (
    EmptyTrajectoryError,
    InsufficientSegmentsError,
    LengthMismatchError,
    ParameterError,
)

INF = math.inf


@dataclass(frozen=True)
class MeasureParams:
    epsilon: float | None = None
    ref_point: GeoPoint | tuple | None = None
    grid: GridSpec | None = None
    quadrature_step: float | None = None

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon >= 0:
            raise ParameterError("epsilon must be >= 0")
        if self.quadrature_step is not None and not self.quadrature_step > 0:
            raise ParameterError("quadrature_step must be > 0")


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(len(a), len(b))`` matrix of Euclidean point distances."""
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])


def _nonempty(*trajs):
    out = []
    for t in trajs:
        c = coords_of(t)
        if len(c) == 0:
            raise EmptyTrajectoryError("measure is undefined for an empty trajectory")
        out.append(c)
    return out


def _check_eps(epsilon):
    if epsilon is None or not epsilon >= 0:
        raise ParameterError(f"epsilon must be a number >= 0, got {epsilon!r}")
    return float(epsilon)


# ---------------------------------------------------------------------------
# point based


def ed(t1, t2) -> float:
    a, b = _nonempty(t1, t2)
    if len(a) != len(b):
        raise LengthMismatchError(f"ED needs equal lengths, got {len(a)} and {len(b)}")
    return float(np.mean(np.hypot(*(a - b).T)))


def dtw(t1, t2) -> float:
    a, b = _nonempty(t1, t2)
    d = pairwise_distances(a, b).tolist()
    m, n = len(a), len(b)
    prev = [0.0] + [INF] * n
    for i in range(m):
        cur = [INF] * (n + 1)
        row = d[i]
        for j in range(n):
            best = prev[j]
            if prev[j + 1] < best:
                best = prev[j + 1]
            if cur[j] < best:
                best = cur[j]
            cur[j + 1] = row[j] + best
        prev = cur
    return prev[n]


def lcss(t1, t2, epsilon: float) -> int:
    eps = _check_eps(epsilon)
    a, b = coords_of(t1), coords_of(t2)
    m, n = len(a), len(b)
    if m == 0 or n == 0:
        return 0
    match = (pairwise_distances(a, b) <= eps).tolist()
    prev = [0] * (n + 1)
    for i in range(m):
        cur = [0] * (n + 1)
        row = match[i]
        for j in range(n):
            if row[j]:
                cur[j + 1] = prev[j] + 1
            else:
                cur[j + 1] = max(prev[j + 1], cur[j])
        prev = cur
    return prev[n]


def edr(t1, t2, epsilon: float) -> int:
    eps = _check_eps(epsilon)
    a, b = coords_of(t1), coords_of(t2)
    m, n = len(a), len(b)
    if m == 0 or n == 0:
        return max(m, n)
    match = (pairwise_distances(a, b) <= eps).tolist()
    prev = list(range(n + 1))
    for i in range(m):
        cur = [i + 1] + [0] * n
        row = match[i]
        for j in range(n):
            cost = 0 if row[j] else 1
            cur[j + 1] = min(prev[j + 1] + 1, cur[j] + 1, prev[j] + cost)
        prev = cur
    return prev[n]


def erp(t1, t2, ref_point) -> float:
    """Edit distance with real penalty against the gap point ``ref_point``."""
    if ref_point is None:
        raise ParameterError("ERP needs a reference point")
    g = np.asarray(_xy(ref_point), dtype=np.float64)
    a, b = coords_of(t1), coords_of(t2)
    m, n = len(a), len(b)
    ga = np.hypot(*(a - g).T).tolist() if m else []
    gb = np.hypot(*(b - g).T).tolist() if n else []
    d = pairwise_distances(a, b).tolist()
    prev = [0.0] * (n + 1)
    for j in range(n):
        prev[j + 1] = prev[j] + gb[j]
    for i in range(m):
        cur = [prev[0] + ga[i]] + [0.0] * n
        row = d[i]
        gi = ga[i]
        for j in range(n):
            cur[j + 1] = min(prev[j] + row[j], cur[j] + gb[j], prev[j + 1] + gi)
        prev = cur
    return prev[n]


def hausdorff(t1, t2) -> float:
    a, b = _nonempty(t1, t2)
    d = pairwise_distances(a, b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def frechet(t1, t2) -> float:
    """Discrete Fréchet distance."""
    a, b = _nonempty(t1, t2)
    return _frechet_table(pairwise_distances(a, b).tolist())


def _frechet_table(d: list[list[float]]) -> float:
    m, n = len(d), len(d[0])
    prev = [INF] * n
    for i in range(m):
        cur = [INF] * n
        row = d[i]
        for j in range(n):
            if i == 0 and j == 0:
                best = -INF
            else:
                best = INF
                if i > 0:
                    best = min(best, prev[j])
                    if j > 0:
                        best = min(best, prev[j - 1])
                if j > 0:
                    best = min(best, cur[j - 1])
            cur[j] = max(row[j], best)
        prev = cur
    return prev[n - 1]


# ---------------------------------------------------------------------------
# segment based


def _need_segments(*trajs):
    out = []
    for t in trajs:
        c = coords_of(t)
        if len(c) < 2:
            raise InsufficientSegmentsError("measure needs at least one segment (2 points)")
        out.append(c)
    return out


def _dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def _lerp(a, b, t):
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def edwp(t1, t2) -> float:
    """Edit distance with projections.

    Each step consumes the first remaining segment of both trajectories.  A
    step either replaces one segment by the other, or first splits one of
    them at the orthogonal projection (clamped) of the other segment's end
    point and replaces the leading piece.  Replacing segments ``l1``/``l2``
    costs ``(|l1.s - l2.s| + |l1.e - l2.e|) * (|l1| + |l2|)``.

    The table is swept forward; a cell ``(i, j)`` holds a small map from the
    current (possibly split) start points to the cheapest cost of reaching
    them, so the result is the exact minimum over all edit sequences.
    """
    a, b = _need_segments(t1, t2)
    A = [tuple(p) for p in a.tolist()]
    B = [tuple(p) for p in b.tolist()]
    m, n = len(A) - 1, len(B) - 1
    cells: list[list[dict | None]] = [[None] * (n + 1) for _ in range(m + 1)]
    cells[0][0] = {(A[0], B[0]): 0.0}

    def relax(i, j, key, cost):
        cell = cells[i][j]
        if cell is None:
            cells[i][j] = {key: cost}
        elif cost < cell.get(key, INF):
            cell[key] = cost

    for i in range(m + 1):
        for j in range(n + 1):
            cell = cells[i][j]
            if cell is None or i == m or j == n:
                continue
            e1, e2 = A[i + 1], B[j + 1]
            for (sa, sb), base in cell.items():
                d_start = _dist(sa, sb)
                len1, len2 = _dist(sa, e1), _dist(sb, e2)
                relax(i + 1, j + 1, (e1, e2), base + (d_start + _dist(e1, e2)) * (len1 + len2))
                p = _lerp(sa, e1, _project_param(e2, sa, e1))
                relax(i, j + 1, (p, e2), base + (d_start + _dist(p, e2)) * (_dist(sa, p) + len2))
                q = _lerp(sb, e2, _project_param(e1, sb, e2))
                relax(i + 1, j, (e1, q), base + (d_start + _dist(e1, q)) * (len1 + _dist(sb, q)))
    final = cells[m][n]
    return min(final.values()) if final else INF


def _polyline_length(pts) -> float:
    return sum(_dist(p, q) for p, q in zip(pts, pts[1:]))


def _point_at(coords, s: float):
    """Point at fractional vertex position ``s`` (segment index + offset)."""
    k = min(int(math.floor(s)), len(coords) - 2)
    return _lerp(coords[k], coords[k + 1], s - k)


def _sub_polyline(coords, s0: float, s1: float):
    """Polyline between fractional positions s0 and s1 (reversed if s1 < s0)."""
    if s1 < s0:
        return _sub_polyline(coords, s1, s0)[::-1]
    pts = [_point_at(coords, s0)]
    for k in range(math.floor(s0) + 1, math.ceil(s1)):
        pts.append(coords[k])
    pts.append(_point_at(coords, s1))
    return pts


def _crossings(A, B) -> list[tuple[float, float]]:
    """Fractional positions (along A, along B) of every A/B intersection."""
    hits = []
    for i in range(len(A) - 1):
        for j in range(len(B) - 1):
            x = _intersection_xy(A[i], A[i + 1], B[j], B[j + 1])
            if x is None:
                continue
            la, lb = _dist(A[i], A[i + 1]), _dist(B[j], B[j + 1])
            sa = i + (_dist(A[i], x) / la if la > 0 else 0.0)
            sb = j + (_dist(B[j], x) / lb if lb > 0 else 0.0)
            hits.append((min(sa, len(A) - 1.0), min(sb, len(B) - 1.0)))
    hits.sort()
    out: list[tuple[float, float]] = []
    for h in hits:
        if not out or abs(h[0] - out[-1][0]) > 1e-9 or abs(h[1] - out[-1][1]) > 1e-9:
            out.append(h)
    return out


def _lip_directed(A, B) -> float:
    p_total = _polyline_length(A) + _polyline_length(B)
    if p_total == 0.0:
        return 0.0
    cuts = [(0.0, 0.0)] + _crossings(A, B) + [(len(A) - 1.0, len(B) - 1.0)]
    total = 0.0
    for (a0, b0), (a1, b1) in zip(cuts, cuts[1:]):
        side1 = _sub_polyline(A, a0, a1)
        side2 = _sub_polyline(B, b0, b1)
        ring = side1 + side2[::-1]
        area = polygon_area(ring) if len(ring) >= 3 else 0.0
        w = (_polyline_length(side1) + _polyline_length(side2)) / p_total
        total += area * w
    return total


def lip(t1, t2) -> float:
    """Locality in-between polylines.

    The two polylines are cut at their intersection points; trajectory start
    and end points act as the outermost cuts.  Each piece pair closes into a
    polygon whose shoelace area is weighted by the share of the total
    perimeter it uses.  When the crossings appear in a different order
    along the two trajectories the cut sequence depends on which one is
    walked, so both directions are averaged.
    """
    a, b = _need_segments(t1, t2)
    A = [tuple(p) for p in a.tolist()]
    B = [tuple(p) for p in b.tolist()]
    return 0.5 * (_lip_directed(A, B) + _lip_directed(B, A))


def _point_to_polyline(p, B) -> float:
    if len(B) == 1:
        return _dist(p, B[0])
    return min(_point_seg_dist(p, B[k], B[k + 1]) for k in range(len(B) - 1))


def _owd_directed(A, B, step: float | None) -> float:
    if step is None or len(A) == 1:
        return sum(_point_to_polyline(p, B) for p in A) / len(A)
    # trapezoid rule along arc length
    total_len = _polyline_length(A)
    if total_len == 0.0:
        return _point_to_polyline(A[0], B)
    acc = 0.0
    for p, q in zip(A, A[1:]):
        seg = _dist(p, q)
        if seg == 0.0:
            continue
        k = max(1, math.ceil(seg / step))
        vals = [_point_to_polyline(_lerp(p, q, s / k), B) for s in range(k + 1)]
        acc += (seg / k) * (sum(vals) - 0.5 * (vals[0] + vals[-1]))
    return acc / total_len


def owd_linear(t1, t2, quadrature_step: float | None = None) -> float:
    """One-way distance on the linear (polyline) representation.

    Each directed term averages, over sample points of one trajectory, the
    distance to the other trajectory's polyline.  By default the samples
    are the trajectory's own points.  With ``quadrature_step`` the average
    becomes an arc-length integral evaluated by the trapezoid rule with
    roughly that spacing.
    """
    if quadrature_step is not None and not quadrature_step > 0:
        raise ParameterError("quadrature_step must be > 0")
    a, b = _nonempty(t1, t2)
    A = [tuple(p) for p in a.tolist()]
    B = [tuple(p) for p in b.tolist()]
    return 0.5 * (_owd_directed(A, B, quadrature_step) + _owd_directed(B, A, quadrature_step))


def _owd_grid_directed(ca: np.ndarray, cb: np.ndarray) -> float:
    d = np.hypot(ca[:, None, 0] - cb[None, :, 0], ca[:, None, 1] - cb[None, :, 1])
    return float(d.min(axis=1).mean())


def owd_grid(t1, t2, grid: GridSpec) -> float:
    """One-way distance on grid cells; cell distance is center-to-center in cell units."""
    if grid is None:
        raise ParameterError("owd_grid needs a GridSpec")
    _nonempty(t1, t2)
    ca = np.array([(c.ix, c.iy) for c in to_grid(t1, grid)], dtype=np.float64)
    cb = np.array([(c.ix, c.iy) for c in to_grid(t2, grid)], dtype=np.float64)
    return 0.5 * (_owd_grid_directed(ca, cb) + _owd_grid_directed(cb, ca))


def _segment_distance_matrix(a: np.ndarray, b: np.ndarray) -> list[list[float]]:
    A = [tuple(p) for p in a.tolist()]
    B = [tuple(p) for p in b.tolist()]
    return [
        [_seg_seg_dist(A[i], A[i + 1], B[j], B[j + 1]) for j in range(len(B) - 1)]
        for i in range(len(A) - 1)
    ]


def seg_hausdorff(t1, t2) -> float:
    a, b = _need_segments(t1, t2)
    d = np.asarray(_segment_distance_matrix(a, b))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def seg_frechet(t1, t2) -> float:
    a, b = _need_segments(t1, t2)
    return _frechet_table(_segment_distance_matrix(a, b))

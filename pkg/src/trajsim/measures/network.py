"""Road-network measures.

Point-based measures reuse the free-space recurrences with the Euclidean
ground distance swapped for the directed shortest-path distance from a
vertex of the first trajectory to a vertex of the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, UndefinedRatioError, UnreachableError
from ..road_network import UNREACHABLE, MatchedTrajectory, RoadNetwork

INF = math.inf


@dataclass(frozen=True)
class TPParams:
    lam: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError("lambda must lie in [0, 1]")


@dataclass(frozen=True)
class NetMeasureParams:
    epsilon: float | None = None
    gap_vertex: int | None = None

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon >= 0:
            raise ParameterError("epsilon must be >= 0")


def _verts(t) -> tuple[int, ...]:
    if isinstance(t, MatchedTrajectory):
        return t.vertices
    return tuple(int(v) for v in t)


def _matrix(net: RoadNetwork, a, b) -> np.ndarray:
    return net.distance_matrix(list(a), list(b))


def _raise_first_unreachable(d: np.ndarray, a, b):
    bad = np.argwhere(~np.isfinite(d))
    if len(bad):
        i, j = bad[0]
        raise UnreachableError(a[i], b[j])


def net_dtw(net: RoadNetwork, t1, t2) -> float:
    a, b = _verts(t1), _verts(t2)
    if not a or not b:
        raise ParameterError("net_dtw needs non-empty trajectories")
    d = _matrix(net, a, b)
    _raise_first_unreachable(d, a, b)
    rows = d.tolist()
    n = len(b)
    prev = [0.0] + [INF] * n
    for row in rows:
        cur = [INF] * (n + 1)
        for j in range(n):
            cur[j + 1] = row[j] + min(prev[j], prev[j + 1], cur[j])
        prev = cur
    return prev[n]


def net_lcss(net: RoadNetwork, t1, t2, epsilon: float) -> int:
    if epsilon is None or not epsilon >= 0:
        raise ParameterError("epsilon must be >= 0")
    a, b = _verts(t1), _verts(t2)
    if not a or not b:
        return 0
    match = (_matrix(net, a, b) <= epsilon).tolist()
    n = len(b)
    prev = [0] * (n + 1)
    for row in match:
        cur = [0] * (n + 1)
        for j in range(n):
            cur[j + 1] = prev[j] + 1 if row[j] else max(prev[j + 1], cur[j])
        prev = cur
    return prev[n]


def net_edr(net: RoadNetwork, t1, t2, epsilon: float) -> int:
    if epsilon is None or not epsilon >= 0:
        raise ParameterError("epsilon must be >= 0")
    a, b = _verts(t1), _verts(t2)
    if not a or not b:
        return max(len(a), len(b))
    match = (_matrix(net, a, b) <= epsilon).tolist()
    n = len(b)
    prev = list(range(n + 1))
    for i, row in enumerate(match):
        cur = [i + 1] + [0] * n
        for j in range(n):
            cur[j + 1] = min(prev[j + 1] + 1, cur[j] + 1, prev[j] + (0 if row[j] else 1))
        prev = cur
    return prev[n]


def net_erp(net: RoadNetwork, t1, t2, gap_vertex: int) -> float:
    if gap_vertex is None:
        raise ParameterError("net_erp needs a gap vertex")
    net._check(gap_vertex)
    a, b = _verts(t1), _verts(t2)
    ga = _matrix(net, a, [gap_vertex]).reshape(-1)
    gb = _matrix(net, b, [gap_vertex]).reshape(-1)
    _raise_first_unreachable(ga.reshape(-1, 1), a, [gap_vertex])
    _raise_first_unreachable(gb.reshape(-1, 1), b, [gap_vertex])
    d = _matrix(net, a, b)
    _raise_first_unreachable(d, a, b)
    rows, ga, gb = d.tolist(), ga.tolist(), gb.tolist()
    n = len(b)
    prev = [0.0] * (n + 1)
    for j in range(n):
        prev[j + 1] = prev[j] + gb[j]
    for i, row in enumerate(rows):
        cur = [prev[0] + ga[i]] + [0.0] * n
        for j in range(n):
            cur[j + 1] = min(prev[j] + row[j], cur[j] + gb[j], prev[j + 1] + ga[i])
        prev = cur
    return prev[n]


def _sim_terms(d12: np.ndarray, d21: np.ndarray) -> float:
    # exp(-inf) == 0, so unreachable vertices contribute nothing
    return float(np.exp(-d12.min(axis=1)).mean() + np.exp(-d21.min(axis=1)).mean())


def tp_components(net: RoadNetwork, t1: MatchedTrajectory, t2: MatchedTrajectory) -> tuple[float, float]:
    """Spatial and temporal similarity terms, each in ``(0, 2]``."""
    if not (t1.has_times and t2.has_times):
        raise ParameterError("TP needs timestamps on both trajectories")
    a, b = t1.vertices, t2.vertices
    sim_s = _sim_terms(_matrix(net, a, b), _matrix(net, b, a))
    ta, tb = np.asarray(t1.times), np.asarray(t2.times)
    dt = np.abs(ta[:, None] - tb[None, :])
    sim_t = _sim_terms(dt, dt.T)
    return sim_s, sim_t


def tp(net: RoadNetwork, t1: MatchedTrajectory, t2: MatchedTrajectory, lam: float) -> float:
    """Spatio-temporal similarity ``lam * Sim_S + (1 - lam) * Sim_T`` (larger is more similar)."""
    if lam is None or not 0.0 <= lam <= 1.0:
        raise ParameterError("lambda must lie in [0, 1]")
    sim_s, sim_t = tp_components(net, t1, t2)
    return lam * sim_s + (1.0 - lam) * sim_t


def lors(net: RoadNetwork, t1: MatchedTrajectory, t2: MatchedTrajectory) -> float:
    """Total length of the longest common (by edge id) subsequence of road edges."""
    e1, e2 = t1.edges(net), t2.edges(net)
    if not e1 or not e2:
        return 0.0
    n = len(e2)
    ids2 = [e.id for e in e2]
    prev = [0.0] * (n + 1)
    for ea in e1:
        cur = [0.0] * (n + 1)
        for j in range(n):
            if ea.id == ids2[j]:
                cur[j + 1] = prev[j] + ea.length
            else:
                cur[j + 1] = max(prev[j + 1], cur[j])
        prev = cur
    return prev[n]


def lcrs(net: RoadNetwork, t1: MatchedTrajectory, t2: MatchedTrajectory) -> float:
    """``LORS / (L1 + L2 - LORS)`` with ``L1``, ``L2`` the trajectories' route lengths."""
    common = lors(net, t1, t2)
    denom = t1.route_length(net) + t2.route_length(net) - common
    if denom <= 0.0:
        raise UndefinedRatioError("LCRS is undefined for two zero-length trajectories")
    return common / denom


__all__ = [
    "NetMeasureParams",
    "TPParams",
    "UNREACHABLE",
    "lcrs",
    "lors",
    "net_dtw",
    "net_edr",
    "net_erp",
    "net_lcss",
    "tp",
    "tp_components",
]

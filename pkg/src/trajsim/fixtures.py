"""Bundled example data and a seeded synthetic generator."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .core import Dataset, Trajectory
from .road_network import MatchedTrajectory, RoadNetwork, grid_network, grid_vertex

Q1_POINTS = [(1, 1, 1), (3, 4, 3), (4, 0, 4), (6, 2, 6), (7, 1, 9)]
Q2_POINTS = [(1, 5, 2), (1, 2, 4), (3, 2, 6), (5, 3, 7), (8, 3, 9), (8, 5, 11)]

GRID_NX, GRID_NY = 9, 6

# reference configuration that reproduces the worked network example
ERP_REF_POINT = (3.0, 2.0)
NET_GAP_VERTEX = grid_vertex(3, 2, GRID_NY)
NET_LCSS_EPSILON = 1.0
NET_EDR_EPSILON = 2.0


def running_example() -> Dataset:
    """The two-trajectory running example, ids ``Q1`` and ``Q2``."""
    return Dataset([Trajectory.from_points("Q1", Q1_POINTS), Trajectory.from_points("Q2", Q2_POINTS)])


def example_network() -> RoadNetwork:
    """Unit-spaced bidirectional 9 x 6 grid covering the running example."""
    return grid_network(GRID_NX, GRID_NY)


def example_matched() -> Dataset:
    """The running example snapped to the grid network's vertices."""
    out = []
    for tid, pts in (("Q1", Q1_POINTS), ("Q2", Q2_POINTS)):
        verts = tuple(grid_vertex(x, y, GRID_NY) for x, y, _ in pts)
        out.append(MatchedTrajectory(tid, verts, tuple(float(t) for _, _, t in pts)))
    return Dataset(out)


def random_walks(
    n: int,
    seed: int,
    min_len: int = 5,
    max_len: int = 20,
    extent: float = 100.0,
    step: float = 1.0,
    with_times: bool = False,
) -> Dataset:
    """``n`` seeded Gaussian random walks with integer ids ``0..n-1``.

    Starts are uniform in ``[0, extent)^2`` and steps are isotropic normal
    with standard deviation ``step``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        m = int(rng.integers(min_len, max_len + 1))
        start = rng.uniform(0.0, extent, size=2)
        coords = start + np.cumsum(np.vstack([np.zeros(2), rng.normal(0.0, step, size=(m - 1, 2))]), axis=0)
        times = np.arange(m, dtype=float) if with_times else None
        out.append(Trajectory(i, coords, times))
    return Dataset(out)


def random_matched(net: RoadNetwork, n: int, seed: int, min_len: int = 3, max_len: int = 10) -> Dataset:
    """Seeded walks along out-edges of ``net`` with unit time steps."""
    rng = np.random.default_rng(seed)
    vids = sorted(net.vertices)
    succ = {v: [] for v in vids}
    for e in sorted(net.edges.values(), key=lambda e: e.id):
        succ[e.source].append(e.target)
    out = []
    for i in range(n):
        m = int(rng.integers(min_len, max_len + 1))
        path = [vids[int(rng.integers(len(vids)))]]
        while len(path) < m and succ[path[-1]]:
            nxt = succ[path[-1]]
            path.append(nxt[int(rng.integers(len(nxt)))])
        out.append(MatchedTrajectory(i, tuple(path), tuple(float(t) for t in range(len(path)))))
    return Dataset(out)


def data_path(name: str):
    """Path of a bundled CSV under ``trajsim/data``."""
    return resources.files("trajsim").joinpath("data", name)

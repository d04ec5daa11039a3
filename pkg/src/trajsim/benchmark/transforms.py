"""Seeded dataset transformations: length, sampling rate, noise, cardinality.

Each transform is a pure function of ``(dataset, parameter, seed)``.  Random
draws come from one ``numpy`` generator per call, consumed in ascending
trajectory id order.  Transformed trajectories never drop below one point, so
length, sampling and noise keep the dataset's cardinality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import Dataset, Trajectory
from ..errors import ParameterError
from ..road_network import MatchedTrajectory

KINDS = ("identity", "length", "sampling", "noise", "cardinality")


def _count(percent: float, n: int) -> int:
    # round first so 60 * 5 / 100 stays 3 despite float noise
    return max(1, math.ceil(round(percent * n / 100.0, 9)))


def _check_percent(name: str, value: float, allow_zero: bool = False) -> float:
    value = float(value)
    lo_ok = value >= 0 if allow_zero else value > 0
    if not (lo_ok and value <= 100):
        bound = "[0, 100]" if allow_zero else "(0, 100]"
        raise ParameterError(f"{name} must lie in {bound}, got {value}")
    return value


def _take(t, idx):
    if isinstance(t, MatchedTrajectory):
        times = None if t.times is None else tuple(t.times[i] for i in idx)
        return MatchedTrajectory(t.id, tuple(t.vertices[i] for i in idx), times)
    return t.subset(idx)


def transform_length(dataset: Dataset, L_percent: float) -> Dataset:
    """Keep the first ``ceil(L * n / 100)`` points of every trajectory."""
    L = _check_percent("L", L_percent)
    return Dataset(_take(t, range(_count(L, len(t)))) for t in dataset)


def transform_sampling(dataset: Dataset, S_percent: float, seed: int) -> Dataset:
    """Keep a uniform random ``ceil(S * n / 100)``-point subset, in original order."""
    S = _check_percent("S", S_percent)
    rng = np.random.default_rng(seed)
    out = []
    for t in dataset:
        c = _count(S, len(t))
        idx = np.sort(rng.choice(len(t), size=c, replace=False)) if c < len(t) else np.arange(len(t))
        out.append(_take(t, idx.tolist()))
    return Dataset(out)


def transform_noise(dataset: Dataset, N_percent: float, deltas: tuple[float, float], seed: int) -> Dataset:
    """Replace ``ceil(N * n / 100)`` random points by Gaussian-perturbed copies.

    A selected point ``(lat, lon)`` becomes ``(lat + dlat * g1, lon + dlon * g2)``
    with independent standard normal ``g1``, ``g2``.  Timestamps are kept.
    ``N_percent == 0`` selects nothing and returns the dataset unchanged.
    """
    N = _check_percent("N", N_percent, allow_zero=True)
    try:
        dlat, dlon = (float(d) for d in deltas)
    except (TypeError, ValueError):
        raise ParameterError(f"noise deltas must be a (dlat, dlon) pair, got {deltas!r}") from None
    if not (dlat > 0 and dlon > 0):
        raise ParameterError("noise deltas must be > 0")
    if N == 0:
        return Dataset(list(dataset))
    rng = np.random.default_rng(seed)
    out = []
    for t in dataset:
        if isinstance(t, MatchedTrajectory):
            raise ParameterError("noise cannot be applied to map-matched trajectories")
        c = _count(N, len(t))
        idx = rng.choice(len(t), size=c, replace=False)
        g = rng.standard_normal((c, 2))
        coords = np.array(t.coords)
        coords[idx, 0] += dlat * g[:, 0]
        coords[idx, 1] += dlon * g[:, 1]
        out.append(Trajectory(t.id, coords, t.times))
    return Dataset(out)


def transform_cardinality(dataset: Dataset, Or_percent: float, seed: int) -> Dataset:
    """Keep a seeded random ``ceil(O_r * |D| / 100)``-trajectory subset."""
    Or = _check_percent("O_r", Or_percent)
    trajs = list(dataset)
    c = _count(Or, len(trajs)) if trajs else 0
    rng = np.random.default_rng(seed)
    if c >= len(trajs):
        return Dataset(trajs)
    keep = np.sort(rng.choice(len(trajs), size=c, replace=False))
    return Dataset(trajs[k] for k in keep)


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    parameter: float = 100.0
    deltas: tuple[float, float] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown transform kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "noise" and self.deltas is None:
            raise ParameterError("noise transform needs deltas")

    def apply(self, dataset: Dataset, seed: int | None = None) -> Dataset:
        s = self.seed if self.seed is not None else (seed if seed is not None else 0)
        if self.kind == "identity":
            return Dataset(list(dataset))
        if self.kind == "length":
            return transform_length(dataset, self.parameter)
        if self.kind == "sampling":
            return transform_sampling(dataset, self.parameter, s)
        if self.kind == "noise":
            return transform_noise(dataset, self.parameter, self.deltas, s)
        return transform_cardinality(dataset, self.parameter, s)


# per-dataset noise radii used in the original experiments (degrees)
NOISE_DELTAS = {
    "ais": (0.1, 0.1),
    "geolife": (0.0005, 0.0005),
    "tdrive": (0.008, 0.007),
    "porto": (0.008, 0.007),
}

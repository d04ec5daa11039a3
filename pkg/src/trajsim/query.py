"""Measure registry plus exact Top-k, threshold and all-pairs queries.

Ranking rule used everywhere (linear scan, pivot index, partitioned engine):
scores are rounded to 12 decimals, ordered by the measure's direction, and
ties go to the smaller trajectory id.  Returned scores keep full precision.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from . import measures as M
from .core import Dataset, GeoPoint, GridSpec, _id_key
from .errors import BudgetExceededError, ParameterError
from .road_network import RoadNetwork

MINIMIZE = "minimize"
MAXIMIZE = "maximize"
RANK_DECIMALS = 12


def _parse_point(v):
    if isinstance(v, GeoPoint):
        return v
    if isinstance(v, str):
        v = [float(x) for x in v.split(",")]
    lat, lon = v
    return (float(lat), float(lon))


def _parse_grid(v):
    if isinstance(v, GridSpec):
        return v
    if isinstance(v, str):
        v = [float(x) for x in v.split(",")]
    return GridSpec(*[float(x) for x in v])


def _parse_network(v):
    if not isinstance(v, RoadNetwork):
        raise ParameterError("'network' must be a RoadNetwork")
    return v


@dataclass(frozen=True)
class ParamSpec:
    name: str
    parse: Callable[[Any], Any]
    required: bool = True
    default: Any = None


@dataclass(frozen=True)
class MeasureDescriptor:
    name: str
    func: Callable
    direction: str
    is_metric: bool
    params: tuple[ParamSpec, ...] = ()
    network: bool = False
    description: str = ""

    @property
    def maximize(self) -> bool:
        return self.direction == MAXIMIZE

    def validate(self, params: Mapping[str, Any] | None) -> dict[str, Any]:
        """Check ``params`` against the schema and return parsed values."""
        params = dict(params or {})
        known = {p.name for p in self.params} | ({"network"} if self.network else set())
        unknown = sorted(set(params) - known)
        if unknown:
            raise ParameterError(f"measure {self.name!r} does not accept parameter(s) {unknown}")
        out: dict[str, Any] = {}
        if self.network:
            if "network" not in params:
                raise ParameterError(f"measure {self.name!r} needs a road network")
            out["network"] = _parse_network(params["network"])
        for spec in self.params:
            if spec.name in params and params[spec.name] is not None:
                try:
                    out[spec.name] = spec.parse(params[spec.name])
                except ParameterError:
                    raise
                except (TypeError, ValueError) as exc:
                    raise ParameterError(f"bad value for {self.name}.{spec.name}: {params[spec.name]!r}") from exc
            elif spec.required:
                raise ParameterError(f"measure {self.name!r} requires parameter {spec.name!r}")
            else:
                out[spec.name] = spec.default
        return out

    def score(self, t1, t2, params: Mapping[str, Any]) -> float:
        """Score a pair with already-validated params."""
        kwargs = dict(params)
        if self.network:
            net = kwargs.pop("network")
            return self.func(net, t1, t2, **kwargs)
        return self.func(t1, t2, **kwargs)

    def rank_key(self, tid, score) -> tuple:
        r = round(float(score), RANK_DECIMALS)
        return (-r if self.maximize else r, _id_key(tid))

    def better_or_equal(self, score, tau) -> bool:
        return score >= tau if self.maximize else score <= tau


def _nonneg(v):
    v = float(v)
    if not v >= 0:
        raise ParameterError("epsilon must be >= 0")
    return v


def _positive(v):
    v = float(v)
    if not v > 0:
        raise ParameterError("quadrature_step must be > 0")
    return v


def _lam(v):
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ParameterError("lam must lie in [0, 1]")
    return v


_EPS = ParamSpec("epsilon", _nonneg)

REGISTRY: dict[str, MeasureDescriptor] = {
    d.name: d
    for d in [
        MeasureDescriptor("ed", M.ed, MINIMIZE, False, description="mean aligned point distance"),
        MeasureDescriptor("dtw", M.dtw, MINIMIZE, False),
        MeasureDescriptor("lcss", M.lcss, MAXIMIZE, False, (_EPS,)),
        MeasureDescriptor("edr", M.edr, MINIMIZE, False, (_EPS,)),
        MeasureDescriptor("erp", M.erp, MINIMIZE, True, (ParamSpec("ref_point", _parse_point),)),
        MeasureDescriptor("hausdorff", M.hausdorff, MINIMIZE, True),
        MeasureDescriptor("frechet", M.frechet, MINIMIZE, True),
        MeasureDescriptor("edwp", M.edwp, MINIMIZE, False),
        MeasureDescriptor("lip", M.lip, MINIMIZE, False),
        MeasureDescriptor(
            "owd", M.owd_linear, MINIMIZE, False, (ParamSpec("quadrature_step", _positive, required=False),)
        ),
        MeasureDescriptor("owd_grid", M.owd_grid, MINIMIZE, False, (ParamSpec("grid", _parse_grid),)),
        MeasureDescriptor("seg_hausdorff", M.seg_hausdorff, MINIMIZE, False),
        MeasureDescriptor("seg_frechet", M.seg_frechet, MINIMIZE, False),
        MeasureDescriptor("net_dtw", M.net_dtw, MINIMIZE, False, network=True),
        MeasureDescriptor("net_lcss", M.net_lcss, MAXIMIZE, False, (_EPS,), network=True),
        MeasureDescriptor("net_edr", M.net_edr, MINIMIZE, False, (_EPS,), network=True),
        MeasureDescriptor("net_erp", M.net_erp, MINIMIZE, False, (ParamSpec("gap_vertex", int),), network=True),
        MeasureDescriptor("tp", M.tp, MAXIMIZE, False, (ParamSpec("lam", _lam),), network=True),
        MeasureDescriptor("lors", M.lors, MAXIMIZE, False, network=True),
        MeasureDescriptor("lcrs", M.lcrs, MAXIMIZE, False, network=True),
    ]
}


def get_measure(measure: str | MeasureDescriptor) -> MeasureDescriptor:
    if isinstance(measure, MeasureDescriptor):
        return measure
    try:
        return REGISTRY[measure]
    except KeyError:
        raise ParameterError(f"unknown measure {measure!r}; choose from {sorted(REGISTRY)}") from None


@dataclass
class QueryResult:
    items: list[tuple[Any, float]]
    elapsed_ms: float = 0.0
    k: int = 0
    truncated: bool = False
    """True when ``k`` exceeded the number of candidates."""
    measure: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def ids(self) -> list:
        return [tid for tid, _ in self.items]

    @property
    def scores(self) -> list[float]:
        return [s for _, s in self.items]

    def same_ranking(self, other: QueryResult) -> bool:
        return self.items == other.items


def rank(desc: MeasureDescriptor, scored: Iterable[tuple[Any, float]], k: int) -> list[tuple[Any, float]]:
    return heapq.nsmallest(k, scored, key=lambda it: desc.rank_key(*it))


def _check_k(k: int) -> int:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    return int(k)


def scan(query, trajectories: Iterable, desc: MeasureDescriptor, params: Mapping[str, Any]):
    """Score every trajectory against the query; ``params`` must be validated."""
    return [(t.id, desc.score(query, t, params)) for t in trajectories]


def topk(query, dataset: Dataset, measure, params: Mapping[str, Any] | None, k: int) -> QueryResult:
    """Exact Top-k by linear scan."""
    desc = get_measure(measure)
    k = _check_k(k)
    if len(dataset) == 0:
        raise ParameterError("cannot query an empty dataset")
    p = desc.validate(params)
    t0 = time.perf_counter()
    items = rank(desc, scan(query, dataset, desc, p), k)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return QueryResult(items, elapsed, k, k > len(dataset), desc.name)


def threshold_query(query, dataset: Dataset, measure, params: Mapping[str, Any] | None, tau: float) -> set:
    """Ids whose score is at least as good as ``tau`` (>= when maximizing, <= otherwise)."""
    desc = get_measure(measure)
    p = desc.validate(params)
    return {tid for tid, s in scan(query, dataset, desc, p) if desc.better_or_equal(s, tau)}


DEFAULT_MATRIX_BUDGET = 256 * 1024 * 1024


def pairwise_matrix(
    dataset: Dataset,
    measure,
    params: Mapping[str, Any] | None,
    budget_bytes: int = DEFAULT_MATRIX_BUDGET,
) -> np.ndarray:
    """All-pairs score matrix in dataset (ascending id) order.

    Every off-diagonal cell is an independent call, so directed network
    distances produce an asymmetric matrix.  The diagonal holds the identity
    score: 0 for distance measures, ``f(t, t)`` for similarity measures.
    """
    desc = get_measure(measure)
    p = desc.validate(params)
    n = len(dataset)
    if n * n * 8 > budget_bytes:
        raise BudgetExceededError(
            f"{n}x{n} matrix needs {n * n * 8} bytes (budget {budget_bytes}); "
            "use the partitioned engine for Top-k queries instead"
        )
    trajs = list(dataset)
    out = np.zeros((n, n))
    for i, a in enumerate(trajs):
        for j, b in enumerate(trajs):
            if i == j:
                out[i, j] = desc.score(a, a, p) if desc.maximize else 0.0
            else:
                out[i, j] = desc.score(a, b, p)
    return out

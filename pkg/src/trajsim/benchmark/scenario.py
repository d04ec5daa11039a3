"""Benchmark scenarios: ground truth, transformed Top-k, HR@k and the CSV report."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from ..core import Dataset, Trajectory, coords_of
from ..errors import ParameterError, TrajSimError
from ..partition import parallel_topk, str_partition
from ..query import get_measure, topk
from .transforms import TransformSpec

log = logging.getLogger(__name__)

REPORT_HEADER = ("measure", "transform", "param", "seed", "k", "hr_at_k", "query_ms")


def hr_at_k(result_ids: Sequence, ground_truth_ids: Sequence, k: int) -> float:
    """Hitting ratio: shared ids divided by ``k``."""
    if not isinstance(k, (int, np.integer)) or k <= 0:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    if len(result_ids) > k or len(ground_truth_ids) > k:
        raise ParameterError("id lists must not be longer than k")
    return len(set(result_ids) & set(ground_truth_ids)) / k


def classify_shape(
    t,
    straight_ratio: float = 1.05,
    round_fraction: float = 0.05,
) -> str:
    """Coarse shape tag: ``straight``, ``round``, ``self_overlapping`` or ``polyline``.

    straight: path length / endpoint displacement < ``straight_ratio``.
    round: endpoints closer than ``round_fraction`` of the path length
    (all-equal points count as round).  self_overlapping: two non-adjacent
    segments intersect.
    """
    from ..core import _intersection_xy

    c = coords_of(t)
    if len(c) < 2:
        raise ParameterError("classify_shape needs at least 2 points")
    steps = np.hypot(*np.diff(c, axis=0).T)
    path = float(steps.sum())
    disp = float(np.hypot(*(c[-1] - c[0])))
    if path == 0.0:
        return "round"
    if disp > 0 and path / disp < straight_ratio:
        return "straight"
    if disp <= round_fraction * path:
        return "round"
    pts = [tuple(p) for p in c.tolist()]
    nseg = len(pts) - 1
    for i in range(nseg):
        for j in range(i + 2, nseg):
            if _intersection_xy(pts[i], pts[i + 1], pts[j], pts[j + 1]) is not None:
                return "self_overlapping"
    return "polyline"


def dataset_centroid(dataset: Dataset) -> tuple[float, float]:
    allc = np.concatenate([coords_of(t) for t in dataset if isinstance(t, Trajectory)])
    lat, lon = allc.mean(axis=0)
    return (float(lat), float(lon))


@dataclass(frozen=True)
class MeasureRun:
    name: str
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass
class ReportRow:
    measure: str
    transform: str
    param: float
    seed: int
    k: int
    hr_at_k: float | None
    query_ms: float | None
    truncated: bool = False
    error: str | None = None

    @property
    def key(self) -> tuple:
        return (self.measure, self.transform, self.param)


@dataclass
class BenchmarkReport:
    rows: list[ReportRow]
    seed: int
    k: int
    dataset_id: str = ""
    n_queries: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in self.rows:
            w.writerow(
                [
                    r.measure,
                    r.transform,
                    _fmt_param(r.param),
                    r.seed,
                    r.k,
                    "" if r.hr_at_k is None else f"{r.hr_at_k:.6f}",
                    "" if r.query_ms is None else f"{r.query_ms:.6f}",
                ]
            )
        return buf.getvalue()

    def errors(self) -> list[ReportRow]:
        return [r for r in self.rows if r.error]


def _fmt_param(p: float) -> str:
    return f"{float(p):g}"


def run_scenario(
    dataset: Dataset,
    queries: Sequence,
    measures: Sequence[MeasureRun],
    transforms: Sequence[TransformSpec],
    k: int,
    seed: int,
    record_timing: bool = True,
    dataset_id: str = "",
    workers: int = 1,
) -> BenchmarkReport:
    """Top-k hitting ratio of every measure under every transform.

    Ground truth is the Top-k of each query on the untransformed dataset;
    each transformed dataset is queried with the same (untransformed) query
    trajectories.  HR@k and query time are averaged over queries.  When the
    dataset holds fewer than ``k`` trajectories the row is flagged
    ``truncated`` and HR is taken against the ground truth's actual size.  A measure
    that fails gets error rows and the remaining rows still run.  Rows are
    sorted by (measure, transform, param) regardless of execution order.
    Set ``record_timing=False`` to leave ``query_ms`` empty so the report
    is byte-reproducible.  ``workers > 1`` routes queries through the
    partitioned engine, which returns the same rankings.
    """
    if not queries:
        raise ParameterError("a scenario needs at least one query")
    transformed = []
    for spec in transforms:
        try:
            transformed.append((spec, spec.apply(dataset, seed), None))
        except TrajSimError as exc:
            log.warning("transform %s=%s failed: %s", spec.kind, spec.parameter, exc)
            transformed.append((spec, None, str(exc)))
    rows: list[ReportRow] = []
    for run in measures:
        desc = get_measure(run.name)
        try:
            truth = [topk(q, dataset, desc, run.params, k).ids for q in queries]
        except TrajSimError as exc:
            log.warning("measure %s failed on ground truth: %s", run.name, exc)
            for spec, _, _ in transformed:
                rows.append(ReportRow(desc.name, spec.kind, spec.parameter, _spec_seed(spec, seed), k, None, None, error=str(exc)))
            continue
        for spec, data, failure in transformed:
            search = _searcher(desc, data, k, workers)
            row = ReportRow(desc.name, spec.kind, spec.parameter, _spec_seed(spec, seed), k, None, None, error=failure)
            if data is None:
                rows.append(row)
                continue
            try:
                hrs, times = [], []
                for q, gt in zip(queries, truth):
                    t0 = time.perf_counter()
                    res = search(q, data, run.params)
                    times.append((time.perf_counter() - t0) * 1000.0)
                    # |D| < k: score against the ground truth's actual size
                    hrs.append(hr_at_k(res.ids[: len(gt)], gt, len(gt)))
                    row.truncated = row.truncated or res.truncated
                row.hr_at_k = float(np.mean(hrs))
                row.query_ms = float(np.mean(times)) if record_timing else None
            except TrajSimError as exc:
                log.warning("measure %s failed on %s=%s: %s", run.name, spec.kind, spec.parameter, exc)
                row.error = str(exc)
            rows.append(row)
    rows.sort(key=lambda r: (r.measure, r.transform, float(r.param)))
    return BenchmarkReport(rows, seed, k, dataset_id, len(queries))


def _searcher(desc, data, k, workers):
    if workers <= 1 or data is None:
        return lambda q, d, prm: topk(q, d, desc, prm, k)
    parts = str_partition(data, workers)
    return lambda q, d, prm: parallel_topk(q, parts, desc, prm, k, workers)


def _spec_seed(spec: TransformSpec, seed: int) -> int:
    return spec.seed if spec.seed is not None else seed

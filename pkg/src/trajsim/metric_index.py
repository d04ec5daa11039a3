"""Pivot table index with triangle-inequality pruning for metric measures.

A flat (LAESA style) table stores the distance from every pivot to every
trajectory.  For a query q and candidate t the bound
``max_i |d(q, p_i) - d(p_i, t)|`` never exceeds ``d(q, t)`` when the measure is
a metric, so candidates whose bound already exceeds the current k-th best
score need no exact evaluation.
"""

from __future__ import annotations

import bisect
import json
import os
import struct
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .core import Dataset, GeoPoint, GridSpec, _id_key, coords_of
from .errors import DataError, ParameterError
from .query import QueryResult, get_measure

MAGIC = b"TSMI"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class PruneStats:
    pruned: int
    total: int

    @property
    def prune_rate(self) -> float:
        return self.pruned / self.total if self.total else 0.0


@dataclass(frozen=True)
class PivotTable:
    measure: str
    params: dict
    pivot_ids: tuple
    ids: tuple
    """Column order of ``distances`` (ascending dataset id)."""
    distances: np.ndarray
    build_ms: float = 0.0

    @property
    def p(self) -> int:
        return len(self.pivot_ids)

    @property
    def n(self) -> int:
        return len(self.ids)


def _require_metric(measure):
    desc = get_measure(measure)
    if not desc.is_metric:
        raise ParameterError(f"measure {desc.name!r} is not a metric; pivot pruning would be unsound")
    return desc


def select_pivots_hf(dataset: Dataset, measure, params: Mapping[str, Any] | None, p: int) -> list:
    """Farthest-first pivot selection.

    The seed is the trajectory whose mean point lies closest to the mean of
    all points.  The first pivot is the trajectory farthest from the seed,
    and each further pivot maximizes its minimum distance to the pivots
    chosen so far.  Ties go to the lowest id.
    """
    desc = _require_metric(measure)
    prm = desc.validate(params)
    trajs = list(dataset)
    if not 1 <= p <= len(trajs):
        raise ParameterError(f"pivot count must be in [1, {len(trajs)}], got {p}")
    means = np.array([coords_of(t).mean(axis=0) for t in trajs])
    centroid = np.concatenate([coords_of(t) for t in trajs]).mean(axis=0)
    gaps = np.hypot(*(means - centroid).T)
    seed = int(np.argmin(gaps))  # argmin returns the first (lowest id) on ties

    def farthest(score_of):
        best, best_score = None, -np.inf
        for k, t in enumerate(trajs):
            if k in chosen:
                continue
            s = score_of(k)
            if s > best_score:
                best, best_score = k, s
        return best

    chosen: list[int] = []
    d_seed = [desc.score(trajs[seed], t, prm) for t in trajs]
    chosen.append(farthest(lambda k: d_seed[k]))
    min_d = np.array([desc.score(trajs[chosen[0]], t, prm) for t in trajs])
    while len(chosen) < p:
        nxt = farthest(lambda k: min_d[k])
        chosen.append(nxt)
        min_d = np.minimum(min_d, [desc.score(trajs[nxt], t, prm) for t in trajs])
    return [trajs[k].id for k in chosen]


def build_pivot_table(dataset: Dataset, measure, params: Mapping[str, Any] | None, pivots) -> PivotTable:
    desc = _require_metric(measure)
    prm = desc.validate(params)
    pivots = list(pivots)
    if not pivots:
        raise ParameterError("need at least one pivot")
    for pid in pivots:
        if pid not in dataset:
            raise ParameterError(f"pivot {pid!r} is not in the dataset")
    t0 = time.perf_counter()
    trajs = list(dataset)
    mat = np.array([[desc.score(dataset[pid], t, prm) for t in trajs] for pid in pivots], dtype=np.float64)
    build_ms = (time.perf_counter() - t0) * 1000.0
    mat.setflags(write=False)
    return PivotTable(desc.name, prm, tuple(pivots), tuple(dataset.ids), mat, build_ms)


def lower_bounds(query_to_pivots: np.ndarray, table: PivotTable) -> np.ndarray:
    """Triangle-inequality lower bound on d(query, t) for every indexed t."""
    dq = np.asarray(query_to_pivots, dtype=np.float64).reshape(-1, 1)
    return np.abs(dq - table.distances).max(axis=0)


def pruned_topk(query, dataset: Dataset, table: PivotTable, k: int) -> tuple[QueryResult, PruneStats]:
    """Exact Top-k that skips candidates whose lower bound cannot make the cut.

    Candidates are visited in ascending lower-bound order so the k-th best
    score tightens early; the scan stops at the first bound that exceeds it.
    """
    desc = get_measure(table.measure)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    if tuple(dataset.ids) != table.ids:
        raise ParameterError("pivot table was built for a different dataset")
    t0 = time.perf_counter()
    trajs = list(dataset)
    col = {tid: j for j, tid in enumerate(table.ids)}
    exact: dict[int, float] = {}
    dq = []
    for pid in table.pivot_ids:
        s = desc.score(query, dataset[pid], table.params)
        dq.append(s)
        exact[col[pid]] = s
    lbs = lower_bounds(dq, table)
    order = sorted(range(len(trajs)), key=lambda j: (lbs[j], _id_key(trajs[j].id)))

    best_keys: list[tuple] = []
    best_items: list[tuple[Any, float]] = []
    visited = 0
    for j in order:
        if len(best_keys) >= k:
            kth = best_items[k - 1][1]
            lb = lbs[j]
            if lb - 1e-9 * max(1.0, abs(lb)) > kth:
                break
        s = exact[j] if j in exact else desc.score(query, trajs[j], table.params)
        exact[j] = s
        visited += 1
        key = desc.rank_key(trajs[j].id, s)
        pos = bisect.bisect(best_keys, key)
        best_keys.insert(pos, key)
        best_items.insert(pos, (trajs[j].id, s))
        del best_keys[k:], best_items[k:]
    computed = len(exact)
    elapsed = (time.perf_counter() - t0) * 1000.0
    stats = PruneStats(len(trajs) - computed, len(trajs))
    result = QueryResult(best_items, elapsed, k, k > len(trajs), desc.name, {"visited": visited})
    return result, stats


# ---------------------------------------------------------------------------
# persistence


def _jsonable_params(params: Mapping[str, Any]) -> dict:
    out = {}
    for key, val in params.items():
        if isinstance(val, GeoPoint):
            val = [val.lat, val.lon]
        elif isinstance(val, GridSpec):
            val = [val.origin_lat, val.origin_lon, val.cell_size_lat, val.cell_size_lon]
        elif isinstance(val, tuple):
            val = list(val)
        out[key] = val
    return out


def save_pivot_table(table: PivotTable, path: str | os.PathLike) -> None:
    """Write the index as ``TSMI`` binary, atomically.

    Layout (little endian): magic, u16 version, u16 name length + UTF-8
    measure name, u32 metadata length + UTF-8 JSON (params, dataset ids,
    build time), u32 p, u32 N, p x u32 pivot column indices, then the
    p x N float64 distance matrix in row-major order.
    """
    name = table.measure.encode("utf-8")
    meta = json.dumps(
        {"params": _jsonable_params(table.params), "ids": list(table.ids), "build_ms": table.build_ms},
        sort_keys=True,
    ).encode("utf-8")
    col = {tid: j for j, tid in enumerate(table.ids)}
    parts = [
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        struct.pack("<H", len(name)),
        name,
        struct.pack("<I", len(meta)),
        meta,
        struct.pack("<II", table.p, table.n),
        struct.pack(f"<{table.p}I", *[col[pid] for pid in table.pivot_ids]),
        np.ascontiguousarray(table.distances, dtype="<f8").tobytes(),
    ]
    atomic_write_bytes(Path(path), b"".join(parts))


def load_pivot_table(path: str | os.PathLike) -> PivotTable:
    data = Path(path).read_bytes()
    try:
        if data[:4] != MAGIC:
            raise DataError(f"{path}: not a TSMI index file")
        (version,) = struct.unpack_from("<H", data, 4)
        if version != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported index version {version}")
        (nlen,) = struct.unpack_from("<H", data, 6)
        off = 8
        name = data[off : off + nlen].decode("utf-8")
        off += nlen
        (mlen,) = struct.unpack_from("<I", data, off)
        off += 4
        meta = json.loads(data[off : off + mlen].decode("utf-8"))
        off += mlen
        p, n = struct.unpack_from("<II", data, off)
        off += 8
        cols = struct.unpack_from(f"<{p}I", data, off)
        off += 4 * p
        mat = np.frombuffer(data, dtype="<f8", count=p * n, offset=off).reshape(p, n).astype(np.float64)
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: truncated or corrupt index ({exc})") from exc
    ids = tuple(meta["ids"])
    if len(ids) != n:
        raise DataError(f"{path}: id list does not match N={n}")
    desc = get_measure(name)
    mat.setflags(write=False)
    return PivotTable(
        name,
        desc.validate(meta["params"]),
        tuple(ids[c] for c in cols),
        ids,
        mat,
        float(meta.get("build_ms", 0.0)),
    )


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

"""CSV readers and writers for trajectories, road networks and matched trajectories."""

from __future__ import annotations

import csv
import io
import math
import os
from collections import defaultdict
from pathlib import Path

from .core import Dataset, Trajectory
from .errors import DataError, NetworkError, TrajSimError
from .metric_index import atomic_write_bytes
from .road_network import EDGE_FIELDS, MatchedTrajectory, RoadNetwork, load_network

TRAJ_FIELDS = ("traj_id", "seq", "lat", "lon")
MATCHED_FIELDS = ("traj_id", "seq", "vertex_id")


def _reader(path):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    return fh


def _check_header(header, required, path, optional=("t",)):
    if header is None:
        raise DataError(f"{path}: missing header", line=1)
    names = [h.strip() for h in header]
    missing = [f for f in required if f not in names]
    extra = [h for h in names if h not in required and h not in optional]
    if missing or extra:
        raise DataError(f"{path}: header must be {','.join(required)}[,t]; got {','.join(names)}", line=1)
    return names


def _coerce_ids(groups: dict) -> dict:
    """Use integer ids when every id is an integer literal."""
    try:
        converted = {int(k): v for k, v in groups.items() if str(int(k)) == k.strip()}
    except ValueError:
        return groups
    return converted if len(converted) == len(groups) else groups


def _group_rows(path, required, value_parse):
    """Read ``traj_id,seq,...`` rows grouped per id and validated for order."""
    groups: dict[str, list] = defaultdict(list)
    with _reader(path) as fh:
        rows = csv.reader(fh)
        names = _check_header(next(rows, None), required, path)
        col = {n: i for i, n in enumerate(names)}
        has_t = "t" in col
        for lineno, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise DataError(f"{path}: expected {len(names)} fields, got {len(row)}", line=lineno)
            tid = row[col["traj_id"]].strip()
            if not tid:
                raise DataError(f"{path}: empty traj_id", line=lineno)
            try:
                seq = int(row[col["seq"]])
                value = value_parse(row, col)
                t = float(row[col["t"]]) if has_t and row[col["t"]].strip() else None
            except ValueError as exc:
                raise DataError(f"{path}: malformed row ({exc})", line=lineno) from None
            if t is not None and not math.isfinite(t):
                raise DataError(f"{path}: non-finite timestamp", line=lineno)
            groups[tid].append((seq, value, t, lineno))
    out = {}
    for tid, recs in groups.items():
        seen = {}
        for seq, _, _, lineno in recs:
            if seq in seen:
                raise DataError(f"{path}: duplicate (traj_id, seq) = ({tid}, {seq})", line=lineno)
            seen[seq] = lineno
        for pos, (seq, _, _, lineno) in enumerate(recs):
            if seq != pos:
                raise DataError(
                    f"{path}: trajectory {tid} seq must increase by 1 from 0; expected {pos}, got {seq}", line=lineno
                )
        times = [t for _, _, t, _ in recs]
        if any(t is None for t in times):
            if any(t is not None for t in times):
                line = next(r[3] for r in recs if r[2] is None)
                raise DataError(f"{path}: trajectory {tid} mixes rows with and without t", line=line)
            times = None
        else:
            for (_, _, a, _), (_, _, b, lineno) in zip(recs, recs[1:]):
                if b < a:
                    raise DataError(f"{path}: trajectory {tid} has non-monotone timestamps", line=lineno)
        out[tid] = ([v for _, v, _, _ in recs], times)
    return _coerce_ids(out)


def _parse_latlon(row, col):
    lat, lon = float(row[col["lat"]]), float(row[col["lon"]])
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise ValueError("non-finite coordinate")
    return (lat, lon)


def load_trajectories(path: str | os.PathLike, min_len: int = 5) -> Dataset:
    """Read a ``traj_id,seq,lat,lon[,t]`` CSV.

    Trajectories with fewer than ``min_len`` points are dropped; the count is
    kept on ``Dataset.dropped``.
    """
    groups = _group_rows(path, TRAJ_FIELDS, _parse_latlon)
    keep, dropped = [], 0
    for tid, (coords, times) in groups.items():
        if len(coords) < min_len:
            dropped += 1
            continue
        keep.append(Trajectory(tid, coords, times))
    ds = Dataset(keep)
    ds.dropped = dropped
    return ds


def _fmt(x: float) -> str:
    # repr round-trips exactly
    return repr(float(x))


def _atomic_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    atomic_write_bytes(Path(path), buf.getvalue().encode("utf-8"))


def write_trajectories(dataset: Dataset, path: str | os.PathLike) -> None:
    with_t = any(t.times is not None for t in dataset)
    header = TRAJ_FIELDS + (("t",) if with_t else ())
    rows = []
    for t in dataset:
        for i, (lat, lon) in enumerate(t.coords.tolist()):
            row = [t.id, i, _fmt(lat), _fmt(lon)]
            if with_t:
                row.append("" if t.times is None else _fmt(t.times[i]))
            rows.append(row)
    _atomic_csv(path, header, rows)


def _parse_vertex(row, col):
    return int(row[col["vertex_id"]])


def load_matched(path: str | os.PathLike, network: RoadNetwork | None = None, min_len: int = 1) -> Dataset:
    """Read a ``traj_id,seq,vertex_id[,t]`` CSV; vertices are checked when ``network`` is given."""
    groups = _group_rows(path, MATCHED_FIELDS, _parse_vertex)
    keep, dropped = [], 0
    for tid, (verts, times) in groups.items():
        if len(verts) < min_len:
            dropped += 1
            continue
        m = MatchedTrajectory(tid, tuple(verts), None if times is None else tuple(times))
        if network is not None:
            try:
                m.validate(network)
            except TrajSimError as exc:
                raise DataError(f"{path}: trajectory {tid}: {exc}") from exc
        keep.append(m)
    ds = Dataset(keep)
    ds.dropped = dropped
    return ds


def write_matched(dataset: Dataset, path: str | os.PathLike) -> None:
    with_t = any(m.times is not None for m in dataset)
    header = MATCHED_FIELDS + (("t",) if with_t else ())
    rows = []
    for m in dataset:
        for i, v in enumerate(m.vertices):
            row = [m.id, i, v]
            if with_t:
                row.append("" if m.times is None else _fmt(m.times[i]))
            rows.append(row)
    _atomic_csv(path, header, rows)


def load_network_csv(path: str | os.PathLike, cache_capacity: int = 4096) -> RoadNetwork:
    """Read an edge list ``edge_id,from_id,to_id,length,from_lat,from_lon,to_lat,to_lon``."""
    with _reader(path) as fh:
        rows = csv.DictReader(fh)
        if rows.fieldnames is None or tuple(h.strip() for h in rows.fieldnames) != EDGE_FIELDS:
            raise DataError(f"{path}: header must be {','.join(EDGE_FIELDS)}", line=1)
        records = []
        for lineno, rec in enumerate(rows, start=2):
            if None in rec or any(v is None for v in rec.values()):
                raise DataError(f"{path}: expected {len(EDGE_FIELDS)} fields", line=lineno)
            records.append((lineno, rec))
    try:
        return load_network((r for _, r in records), cache_capacity=cache_capacity)
    except NetworkError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_network(net: RoadNetwork, path: str | os.PathLike) -> None:
    rows = []
    for e in sorted(net.edges.values(), key=lambda e: e.id):
        a, b = net.vertices[e.source], net.vertices[e.target]
        rows.append([e.id, e.source, e.target, _fmt(e.length), _fmt(a.lat), _fmt(a.lon), _fmt(b.lat), _fmt(b.lon)])
    _atomic_csv(path, EDGE_FIELDS, rows)

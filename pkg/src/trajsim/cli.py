"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 computation error.
Failures print one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .core import Dataset
from .errors import DataError, NetworkError, ParameterError, TrajSimError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_COMPUTE = 0, 1, 2, 3

log = logging.getLogger("trajsim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x: float) -> str:
    return f"{float(x):.6f}"


def _parse_id(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def _kv(pairs) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise ParameterError(f"--param expects key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def _add_data_args(p):
    p.add_argument("--data", help="trajectory CSV (default: bundled running example)")
    p.add_argument("--network", help="edge-list CSV for network measures (default: bundled grid)")
    p.add_argument("--matched", help="matched-trajectory CSV (default: bundled matched pair)")
    p.add_argument("--min-len", type=int, default=None, help="drop trajectories with fewer points")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="measure parameter; repeatable")


def _load(args, network_measure: bool):
    """Dataset and network for a command; bundled fixtures fill in missing paths."""
    from .io import load_matched, load_network_csv, load_trajectories

    if network_measure:
        net = load_network_csv(args.network) if args.network else fixtures.example_network()
        if args.matched:
            data = load_matched(args.matched, net, min_len=args.min_len or 1)
        else:
            data = fixtures.example_matched()
        return data, net
    if args.data:
        return load_trajectories(args.data, 5 if args.min_len is None else args.min_len), None
    return fixtures.running_example(), None


def _measure_params(desc, args, data, net) -> dict:
    from .benchmark.scenario import dataset_centroid

    params = _kv(args.param)
    if str(params.get("ref_point", "")).lower() == "centroid":
        params["ref_point"] = dataset_centroid(data)
    if desc.network:
        params["network"] = net
    return desc.validate(params)


def _get(data: Dataset, tid):
    if tid not in data:
        raise ParameterError(f"trajectory {tid!r} not found; available ids start with {data.ids[:5]}")
    return data[tid]


def cmd_compute(args) -> int:
    from .query import get_measure

    desc = get_measure(args.measure)
    data, net = _load(args, desc.network)
    params = _measure_params(desc, args, data, net)
    score = desc.score(_get(data, _parse_id(args.t1)), _get(data, _parse_id(args.t2)), params)
    print(_fmt(score))
    return EXIT_OK


def _write_ranking(result) -> None:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["rank", "traj_id", "score"])
    for r, (tid, s) in enumerate(result.items, start=1):
        w.writerow([r, tid, _fmt(s)])


def cmd_topk(args) -> int:
    from .metric_index import load_pivot_table, pruned_topk
    from .partition import parallel_topk, str_partition
    from .query import get_measure, topk

    desc = get_measure(args.measure)
    data, net = _load(args, desc.network)
    query = _get(data, _parse_id(args.query))
    if args.index:
        table = load_pivot_table(args.index)
        if table.measure != desc.name:
            raise ParameterError(f"index was built for {table.measure!r}, not {desc.name!r}")
        if args.param and _measure_params(desc, args, data, net) != table.params:
            raise ParameterError("--param values differ from the ones stored in the index")
        result, stats = pruned_topk(query, data, table, args.k)
        log.info("prune rate %.6f", stats.prune_rate)
    elif args.workers > 1:
        params = _measure_params(desc, args, data, net)
        result = parallel_topk(query, str_partition(data, args.workers), desc, params, args.k, args.workers)
    else:
        result = topk(query, data, desc, _measure_params(desc, args, data, net), args.k)
    if result.truncated:
        log.warning("k=%d exceeds the dataset size %d", args.k, len(data))
    _write_ranking(result)
    return EXIT_OK


def cmd_transform(args) -> int:
    from .benchmark.transforms import NOISE_DELTAS, TransformSpec
    from .io import write_matched, write_trajectories

    deltas = None
    if args.kind == "noise":
        if args.deltas is None:
            raise ParameterError("noise needs --deltas DLAT,DLON or a dataset name")
        name = args.deltas.strip().lower()
        if name in NOISE_DELTAS:
            deltas = NOISE_DELTAS[name]
        else:
            try:
                vals = [float(v) for v in args.deltas.split(",")]
            except ValueError:
                raise ParameterError(f"bad --deltas {args.deltas!r}") from None
            deltas = (vals[0], vals[0]) if len(vals) == 1 else tuple(vals)
    spec = TransformSpec(args.kind, args.param, deltas, args.seed)
    network_input = bool(args.matched)
    data, _ = _load(args, network_input)
    out = spec.apply(data, args.seed)
    (write_matched if network_input else write_trajectories)(out, args.out)
    print(f"wrote {len(out)} trajectories to {args.out}")
    return EXIT_OK


def cmd_index_build(args) -> int:
    from .metric_index import build_pivot_table, save_pivot_table, select_pivots_hf
    from .query import get_measure

    desc = get_measure(args.measure)
    data, net = _load(args, desc.network)
    params = _measure_params(desc, args, data, net)
    pivots = select_pivots_hf(data, desc, params, args.pivots)
    table = build_pivot_table(data, desc, params, pivots)
    save_pivot_table(table, args.out)
    print(f"measure={table.measure} pivots={table.p} n={table.n} t_idx_ms={_fmt(table.build_ms)}")
    return EXIT_OK


def cmd_index_stats(args) -> int:
    from .metric_index import load_pivot_table, pruned_topk
    from .query import get_measure

    table = load_pivot_table(args.index)
    print(f"measure={table.measure} pivots={table.p} n={table.n} t_idx_ms={_fmt(table.build_ms)}")
    if args.queries:
        data, _ = _load(args, get_measure(table.measure).network)
        rng = np.random.default_rng(args.seed)
        ids = data.ids
        picks = [ids[i] for i in sorted(rng.choice(len(ids), size=min(args.queries, len(ids)), replace=False))]
        rates = [pruned_topk(data[q], data, table, args.k)[1].prune_rate for q in picks]
        print(f"queries={len(picks)} k={args.k} prune_rate={_fmt(sum(rates) / len(rates))}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .benchmark.config import run_bench

    report = run_bench(args.config, args.out, record_timing=not args.no_timing, charts=not args.no_charts)
    for row in report.errors():
        log.warning("row %s/%s/%g failed: %s", row.measure, row.transform, row.param, row.error)
    print(f"wrote {len(report.rows)} rows to {Path(args.out) / 'report.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="trajsim", description="Trajectory similarity measures, Top-k search and benchmark.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", help="score one trajectory pair")
    c.add_argument("--measure", required=True)
    c.add_argument("--t1", required=True)
    c.add_argument("--t2", required=True)
    _add_data_args(c)
    c.set_defaults(func=cmd_compute)

    t = sub.add_parser("topk", help="ranked Top-k as CSV on stdout")
    t.add_argument("--measure", required=True)
    t.add_argument("--query", required=True)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--index", help="pivot index file built by 'index build'")
    t.add_argument("--workers", type=int, default=1)
    _add_data_args(t)
    t.set_defaults(func=cmd_topk)

    x = sub.add_parser("transform", help="write a transformed dataset")
    x.add_argument("--kind", required=True, choices=["identity", "length", "sampling", "noise", "cardinality"])
    x.add_argument("--param", type=float, default=100.0, help="percentage")
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--deltas", help="noise radii 'dlat,dlon' or ais|geolife|tdrive|porto")
    x.add_argument("--out", required=True)
    x.add_argument("--data")
    x.add_argument("--matched")
    x.add_argument("--network")
    x.add_argument("--min-len", type=int, default=None)
    x.set_defaults(func=cmd_transform)

    i = sub.add_parser("index", help="build or inspect a pivot index")
    isub = i.add_subparsers(dest="index_command", required=True, parser_class=_Parser)
    b = isub.add_parser("build")
    b.add_argument("--measure", required=True)
    b.add_argument("--pivots", type=int, default=5)
    b.add_argument("--out", required=True)
    _add_data_args(b)
    b.set_defaults(func=cmd_index_build)
    s = isub.add_parser("stats")
    s.add_argument("--index", required=True)
    s.add_argument("--queries", type=int, default=0, help="measure PruneRate over this many seeded queries")
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    _add_data_args(s)
    s.set_defaults(func=cmd_index_stats)

    r = sub.add_parser("bench", help="run a scenario file")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--no-timing", action="store_true", help="leave query_ms empty for byte-stable reports")
    r.add_argument("--no-charts", action="store_true")
    r.set_defaults(func=cmd_bench)
    return p


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParameterError as exc:
        return _fail(EXIT_USAGE, exc)
    except (DataError, NetworkError, OSError) as exc:
        return _fail(EXIT_DATA, exc)
    except TrajSimError as exc:
        return _fail(EXIT_COMPUTE, exc)


if __name__ == "__main__":
    sys.exit(main())

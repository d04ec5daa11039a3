"""INI scenario files and the end-to-end ``bench`` runner.

Example::

    [scenario]
    dataset = builtin:synthetic     ; CSV path, builtin:synthetic or builtin:running
    k = 10
    seed = 42
    n_queries = 5                   ; or: queries = 3, 17, 40

    [measure.dtw]

    [measure.erp]
    ref_point = centroid            ; or "lat, lon"

    [transform.sampling]
    params = 20, 60, 100

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..core import Dataset, _id_key
from ..errors import DataError, ParameterError
from ..query import get_measure
from .scenario import BenchmarkReport, MeasureRun, dataset_centroid, run_scenario
from .transforms import KINDS, NOISE_DELTAS, TransformSpec


@dataclass
class RunConfig:
    dataset: str = "builtin:synthetic"
    network: str | None = None
    matched: str | None = None
    k: int = 50
    seed: int = 0
    queries: list | None = None
    n_queries: int = 5
    workers: int = 1
    min_len: int = 5
    synthetic_n: int = 200
    synthetic_seed: int = 1
    name: str = "scenario"
    measures: list[tuple[str, dict]] = field(default_factory=list)
    transforms: list[TransformSpec] = field(default_factory=list)
    base_dir: Path = field(default_factory=Path.cwd)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _ids(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            out.append(int(tok) if tok.lstrip("-").isdigit() else tok)
    return out


def parse_config(path: str | os.PathLike) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise DataError(f"{path}: {exc}") from exc
    if not cp.has_section("scenario"):
        raise ParameterError(f"{path}: missing [scenario] section")
    sc = cp["scenario"]
    cfg = RunConfig(base_dir=Path(path).resolve().parent)
    known = {
        "dataset", "network", "matched", "k", "seed", "queries", "n_queries",
        "workers", "min_len", "synthetic_n", "synthetic_seed", "name",
    }
    unknown = sorted(set(sc) - known)
    if unknown:
        raise ParameterError(f"{path}: unknown [scenario] key(s) {unknown}")
    try:
        cfg.dataset = sc.get("dataset", cfg.dataset)
        cfg.network = sc.get("network")
        cfg.matched = sc.get("matched")
        cfg.k = sc.getint("k", cfg.k)
        cfg.seed = sc.getint("seed", cfg.seed)
        cfg.n_queries = sc.getint("n_queries", cfg.n_queries)
        cfg.workers = sc.getint("workers", cfg.workers)
        cfg.min_len = sc.getint("min_len", cfg.min_len)
        cfg.synthetic_n = sc.getint("synthetic_n", cfg.synthetic_n)
        cfg.synthetic_seed = sc.getint("synthetic_seed", cfg.synthetic_seed)
        cfg.name = sc.get("name", cfg.name)
        if "queries" in sc:
            cfg.queries = _ids(sc["queries"])
    except ValueError as exc:
        raise ParameterError(f"{path}: {exc}") from exc

    for section in cp.sections():
        head, _, tail = section.partition(".")
        if section == "scenario":
            continue
        if head == "measure" and tail:
            get_measure(tail)
            cfg.measures.append((tail, dict(cp[section])))
        elif head == "transform" and tail:
            cfg.transforms.extend(_transform_specs(section, tail, cp[section]))
        else:
            raise ParameterError(f"{path}: unexpected section [{section}]")
    if not cfg.measures:
        raise ParameterError(f"{path}: no [measure.NAME] sections")
    if not cfg.transforms:
        cfg.transforms = [TransformSpec("identity")]
    return cfg


def _transform_specs(section: str, label: str, sec) -> list[TransformSpec]:
    kind = sec.get("kind", label)
    if kind not in KINDS:
        raise ParameterError(f"[{section}]: unknown transform kind {kind!r}")
    seed = sec.getint("seed") if "seed" in sec else None
    deltas = None
    if kind == "noise":
        raw = sec.get("deltas")
        if raw is None:
            raise ParameterError(f"[{section}]: noise needs deltas = dlat, dlon (or a dataset name)")
        if raw.strip().lower() in NOISE_DELTAS:
            deltas = NOISE_DELTAS[raw.strip().lower()]
        else:
            vals = _floats(raw)
            deltas = (vals[0], vals[0]) if len(vals) == 1 else tuple(vals)
    params = _floats(sec.get("params", "100"))
    return [TransformSpec(kind, p, deltas, seed) for p in params]


def _resolve(cfg: RunConfig, ref: str) -> Path:
    p = Path(ref)
    return p if p.is_absolute() else cfg.base_dir / p


def load_inputs(cfg: RunConfig):
    """Return ``(free_dataset, network, matched_dataset)``; missing parts are ``None``."""
    from .. import fixtures
    from ..io import load_matched, load_network_csv, load_trajectories

    if cfg.dataset == "builtin:synthetic":
        free = fixtures.random_walks(cfg.synthetic_n, cfg.synthetic_seed, min_len=max(cfg.min_len, 2))
    elif cfg.dataset == "builtin:running":
        free = fixtures.running_example()
    elif cfg.dataset in ("", "none"):
        free = None
    else:
        free = load_trajectories(_resolve(cfg, cfg.dataset), cfg.min_len)
    net = matched = None
    if cfg.network == "builtin:grid":
        net = fixtures.example_network()
    elif cfg.network:
        net = load_network_csv(_resolve(cfg, cfg.network))
    if cfg.matched == "builtin:running":
        matched = fixtures.example_matched()
    elif cfg.matched == "builtin:random" and net is not None:
        matched = fixtures.random_matched(net, cfg.synthetic_n, cfg.synthetic_seed)
    elif cfg.matched:
        matched = load_matched(_resolve(cfg, cfg.matched), net)
    return free, net, matched


def pick_queries(dataset: Dataset, cfg: RunConfig) -> list:
    if cfg.queries is not None:
        missing = [q for q in cfg.queries if q not in dataset]
        if missing:
            raise ParameterError(f"query ids not in dataset: {missing}")
        return [dataset[q] for q in cfg.queries]
    ids = dataset.ids
    n = min(cfg.n_queries, len(ids))
    rng = np.random.default_rng(cfg.seed)
    picked = sorted((ids[i] for i in rng.choice(len(ids), size=n, replace=False)), key=_id_key)
    return [dataset[q] for q in picked]


def _measure_params(name: str, raw: dict, data: Dataset, net) -> dict[str, Any]:
    params: dict[str, Any] = dict(raw)
    if params.get("ref_point", "").strip().lower() == "centroid":
        params["ref_point"] = dataset_centroid(data)
    if get_measure(name).network:
        params["network"] = net
    return params


def run_config(cfg: RunConfig, record_timing: bool = True) -> BenchmarkReport:
    free, net, matched = load_inputs(cfg)
    rows = []
    n_queries = 0
    for use_net in (False, True):
        names = [(n, raw) for n, raw in cfg.measures if get_measure(n).network == use_net]
        if not names:
            continue
        data = matched if use_net else free
        if data is None or (use_net and net is None):
            what = "network and matched trajectories" if use_net else "a trajectory dataset"
            raise ParameterError(f"measures {[n for n, _ in names]} need {what}")
        queries = pick_queries(data, cfg)
        runs = [MeasureRun(n, _measure_params(n, raw, data, net)) for n, raw in names]
        rep = run_scenario(data, queries, runs, cfg.transforms, cfg.k, cfg.seed, record_timing, cfg.name, cfg.workers)
        rows.extend(rep.rows)
        n_queries = max(n_queries, rep.n_queries)
    rows.sort(key=lambda r: (r.measure, r.transform, float(r.param)))
    return BenchmarkReport(rows, cfg.seed, cfg.k, cfg.name, n_queries)


def run_bench(config_path, out_dir, record_timing: bool = True, charts: bool = True) -> BenchmarkReport:
    """Run a scenario file and write ``report.csv`` plus SVG charts into ``out_dir``."""
    from ..metric_index import atomic_write_bytes
    from .plots import plot_hr, plot_query_time

    cfg = parse_config(config_path)
    report = run_config(cfg, record_timing)
    out = Path(out_dir)
    atomic_write_bytes(out / "report.csv", report.to_csv().encode("utf-8"))
    if charts:
        plot_hr(report, out / "hr_at_k.svg")
        plot_query_time(report, out / "query_time.svg")
    return report

"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line (criterion 1 gets one line per
measure).  The lines print inline with ``-s`` and always appear in the
"acceptance criteria" section of the terminal summary.
"""

from __future__ import annotations

import math
import os
import time

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE, random_traj
from trajsim import fixtures
from trajsim.benchmark import MeasureRun, TransformSpec, run_scenario
from trajsim.core import GridSpec, Trajectory
from trajsim.measures import (
    dtw,
    edr,
    edwp,
    erp,
    frechet,
    hausdorff,
    lcrs,
    lcss,
    lip,
    lors,
    net_dtw,
    net_edr,
    net_erp,
    net_lcss,
    owd_grid,
    owd_linear,
    seg_frechet,
    tp,
)
from trajsim.metric_index import build_pivot_table, lower_bounds, pruned_topk, select_pivots_hf
from trajsim.partition import parallel_topk, str_partition
from trajsim.query import REGISTRY, get_measure, topk
from trajsim.road_network import MatchedTrajectory


def verdict(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def within(value: float, target: float, tol: float) -> bool:
    return abs(value - target) <= tol


# --- 1. free-space running example -------------------------------------------------

R = fixtures.ERP_REF_POINT
GOLDEN_FREE = [
    ("dtw", lambda a, b: dtw(a, b), 16.52, 0.01),
    ("lcss", lambda a, b: lcss(a, b, 1.0), 1, 0.0),
    ("edr", lambda a, b: edr(a, b, 1.0), 5, 0.0),
    ("erp", lambda a, b: erp(a, b, R), 15.45, 0.01),
    ("hausdorff", lambda a, b: hausdorff(a, b), 3.61, 0.01),
    ("frechet", lambda a, b: frechet(a, b), 4.12, 0.01),
    ("edwp", lambda a, b: edwp(a, b), 5.14, 0.05),
    ("lip", lambda a, b: lip(a, b), 4.04, 0.05),
    ("owd", lambda a, b: owd_linear(a, b), 1.67, 0.15),
    ("owd_grid", lambda a, b: owd_grid(a, b, GridSpec()), 0.25, 0.10),
]


@pytest.mark.parametrize("name,fn,target,tol", GOLDEN_FREE, ids=[g[0] for g in GOLDEN_FREE])
def test_c1_free_space_golden(name, fn, target, tol):
    ex = fixtures.running_example()
    got = fn(ex["Q1"], ex["Q2"])
    verdict(f"criterion 1 [{name}]", within(got, target, tol), f"got {got:.4f}, want {target} +/- {tol}")


def test_c1_runtime():
    ex = fixtures.running_example()
    t0 = time.perf_counter()
    for _, fn, _, _ in GOLDEN_FREE:
        fn(ex["Q1"], ex["Q2"])
    elapsed = time.perf_counter() - t0
    verdict("criterion 1 [runtime]", elapsed < 1.0, f"{elapsed:.3f} s for the whole suite, budget 1 s")


# --- 2. road-network running example ---------------------------------------------------


def test_c2_network_golden():
    t0 = time.perf_counter()
    net = fixtures.example_network()
    m = fixtures.example_matched()
    a, b = m["Q1"], m["Q2"]
    got = {
        "net_dtw": net_dtw(net, a, b),
        "net_erp": net_erp(net, a, b, fixtures.NET_GAP_VERTEX),
        "net_edr": net_edr(net, a, b, fixtures.NET_EDR_EPSILON),
        "net_lcss": net_lcss(net, a, b, fixtures.NET_LCSS_EPSILON),
        "lors": lors(net, a, b),
        "lcrs": lcrs(net, a, b),
        "tp": tp(net, a, b, 0.2),
    }
    want = {"net_dtw": (19.0, 0.01), "net_erp": (20.0, 0.01), "net_edr": (4, 0), "net_lcss": (1, 0),
            "lors": (0.0, 0), "lcrs": (0.0, 0.005), "tp": (1.17, 0.01)}
    # pinned epsilons come from a search over a half-unit grid
    grid = [0.5 * k for k in range(9)]
    lcss_ok = [e for e in grid if net_lcss(net, a, b, e) == 1]
    edr_ok = [e for e in grid if net_edr(net, a, b, e) == 4]
    elapsed = time.perf_counter() - t0
    bad = [k for k, (v, tol) in want.items() if not within(got[k], v, tol)]
    detail = ", ".join(f"{k}={got[k]:.4f}" for k in want)
    detail += f"; eps search: net_lcss ok at {lcss_ok}, net_edr ok at {edr_ok}; {elapsed:.3f} s"
    verdict("criterion 2", not bad and elapsed < 1.0 and fixtures.NET_LCSS_EPSILON in lcss_ok
            and fixtures.NET_EDR_EPSILON in edr_ok, detail + (f"; off: {bad}" if bad else ""))


# --- 3. metric axioms ---------------------------------------------------------------------


def test_c3_metric_axioms():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    g = (5.0, 5.0)
    fns = {"erp": lambda x, y: erp(x, y, g), "hausdorff": hausdorff, "frechet": frechet}
    failures = []
    for _ in range(1000):
        a, b, c = (random_traj(rng, 2, 8) for _ in range(3))
        for name, f in fns.items():
            ab, ba, bc, ac, aa = f(a, b), f(b, a), f(b, c), f(a, c), f(a, a)
            if aa != 0.0 or ab <= 0.0 or abs(ab - ba) > 1e-9 or ac > ab + bc + 1e-9:
                failures.append(name)
    # pinned DTW counterexample to the triangle inequality
    x, y, z = Trajectory(None, [(0, 0)]), Trajectory(None, [(1, 0)]), Trajectory(None, [(2, 0)] * 3)
    dtw_breaks = dtw(x, z) > dtw(x, y) + dtw(y, z)
    elapsed = time.perf_counter() - t0
    verdict(
        "criterion 3",
        not failures and dtw_breaks and elapsed < 30.0,
        f"1000 triples x 3 measures, {len(failures)} axiom violations; "
        f"dtw(a,c)={dtw(x, z):.1f} > {dtw(x, y) + dtw(y, z):.1f}; {elapsed:.1f} s",
    )


# --- 4. oracle equivalence ---------------------------------------------------------------


def _walk(net_succ, vids, rng, n):
    path = [vids[int(rng.integers(len(vids)))]]
    while len(path) < n:
        nxt = net_succ[path[-1]]
        path.append(nxt[int(rng.integers(len(nxt)))])
    return path


def test_c4_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    mism: dict[str, int] = {}

    def check(name, got, want):
        if not (got == want or abs(got - want) <= 1e-9):
            mism[name] = mism.get(name, 0) + 1

    for k in range(500):
        quantized = k % 2 == 0  # half-step coordinates exercise exact ties
        def pts(lo):
            n = int(rng.integers(lo, 7))
            p = rng.uniform(0, 6, size=(n, 2))
            return Trajectory(None, np.round(p * 2) / 2 if quantized else p)
        a, b = pts(1), pts(1)
        eps = float(rng.integers(0, 7)) / 2
        check("dtw", dtw(a, b), oracles.dtw(a, b))
        check("lcss", lcss(a, b, eps), oracles.lcss(a, b, eps))
        check("edr", edr(a, b, eps), oracles.edr(a, b, eps))
        check("erp", erp(a, b, R), oracles.erp(a, b, R))
        check("frechet", frechet(a, b), oracles.frechet(a, b))
        a, b = pts(2), pts(2)
        check("edwp", edwp(a, b), oracles.edwp(a, b))
        check("seg_frechet", seg_frechet(a, b), oracles.seg_frechet(a, b))

    net = fixtures.example_network()
    g = oracles.to_digraph(net)
    d = oracles.nx_dist(g)
    vids = sorted(net.vertices)
    succ = {v: sorted(g.successors(v)) for v in vids}
    for k in range(500):
        A = _walk(succ, vids, rng, int(rng.integers(1, 7)))
        if k % 2:
            # start inside A so shared routes are common
            B = _walk(succ, [A[int(rng.integers(len(A)))]], rng, int(rng.integers(1, 7)))
        else:
            B = _walk(succ, vids, rng, int(rng.integers(1, 7)))
        eps = float(rng.integers(0, 5))
        gap = vids[int(rng.integers(len(vids)))]
        check("net_dtw", net_dtw(net, A, B), oracles.net_dtw(d, A, B))
        check("net_lcss", net_lcss(net, A, B, eps), oracles.net_lcss(d, A, B, eps))
        check("net_edr", net_edr(net, A, B, eps), oracles.net_edr(d, A, B, eps))
        check("net_erp", net_erp(net, A, B, gap), oracles.net_erp(d, A, B, gap))
        ea = tuple(((u, v), g[u][v]["weight"]) for u, v in zip(A, A[1:]) if g.has_edge(u, v))
        eb = tuple(((u, v), g[u][v]["weight"]) for u, v in zip(B, B[1:]) if g.has_edge(u, v))
        ma, mb = MatchedTrajectory(0, tuple(A)), MatchedTrajectory(1, tuple(B))
        want = oracles.lors(ea, eb)
        check("lors", lors(net, ma, mb), want)
        la = sum(d(u, v) for u, v in zip(A, A[1:]))
        lb = sum(d(u, v) for u, v in zip(B, B[1:]))
        if la + lb - want > 0:
            check("lcrs", lcrs(net, ma, mb), want / (la + lb - want))
    elapsed = time.perf_counter() - t0
    verdict(
        "criterion 4",
        not mism and elapsed < 60.0,
        f"500 free + 500 network pairs, m,n <= 6, tol 1e-9; mismatches {mism or 'none'}; {elapsed:.1f} s",
    )


# --- 5. pruning exactness ------------------------------------------------------------------


@pytest.mark.parametrize(
    "measure,params", [("erp", {"ref_point": (50.0, 50.0)}), ("hausdorff", None), ("frechet", None)]
)
def test_c5_pruning_exactness(measure, params):
    t0 = time.perf_counter()
    ds = fixtures.random_walks(500, seed=1)
    desc = get_measure(measure)
    prm = desc.validate(params)
    table = build_pivot_table(ds, measure, params, select_pivots_hf(ds, measure, params, 16))
    queries = fixtures.random_walks(200, seed=99)
    wrong, rates = 0, []
    for q in queries:
        got, stats = pruned_topk(q, ds, table, 50)
        if got.items != topk(q, ds, measure, params, 50).items:
            wrong += 1
        rates.append(stats.prune_rate)
    # lower bound soundness on 50 targets for each of the 200 queries
    rng = np.random.default_rng(5)
    unsound = 0
    for q in queries:
        lbs = lower_bounds([desc.score(q, ds[p], prm) for p in table.pivot_ids], table)
        for j in rng.choice(len(ds), size=50, replace=False):
            if lbs[j] > desc.score(q, ds[table.ids[j]], prm) + 1e-9:
                unsound += 1
    elapsed = time.perf_counter() - t0
    verdict(
        f"criterion 5 [{measure}]",
        wrong == 0 and float(np.mean(rates)) > 0 and unsound == 0 and elapsed < 120.0,
        f"{wrong}/200 ranking mismatches, mean prune_rate@50 {np.mean(rates):.3f} "
        f"(min {min(rates):.3f}), {unsound}/10000 bound violations; {elapsed:.1f} s",
    )


# --- 6. parallel determinism and speedup ----------------------------------------------------


def _serialize(res) -> bytes:
    return "\n".join(f"{tid},{s!r}" for tid, s in res.items).encode()


def test_c6_parallel_byte_identical():
    ds = fixtures.random_walks(1000, seed=3)
    parts = {w: str_partition(ds, w) for w in (1, 2, 4)}
    same = True
    for qid in (0, 123, 999):
        outs = {_serialize(parallel_topk(ds[qid], parts[w], "dtw", None, 50, workers=w)) for w in (1, 2, 4)}
        outs.add(_serialize(topk(ds[qid], ds, "dtw", None, 50)))
        same = same and len(outs) == 1
    verdict("criterion 6 [determinism]", same, "workers 1, 2, 4 and linear scan give byte-identical rankings")


def test_c6_parallel_speedup():
    ds = fixtures.random_walks(5000, seed=4)
    q = ds[0]

    def best(workers):
        parts = str_partition(ds, workers)
        times = []
        for _ in range(3):
            t0 = time.perf_counter()
            parallel_topk(q, parts, "dtw", None, 50, workers=workers)
            times.append(time.perf_counter() - t0)
        return min(times)

    t1, t4 = best(1), best(4)
    verdict(
        "criterion 6 [speedup]",
        t1 / t4 > 1.0,
        f"5000 trajectories: 1 worker {t1:.3f} s, 4 workers {t4:.3f} s, speedup {t1 / t4:.2f} "
        f"on {os.cpu_count()} CPU(s)",
    )


# --- 7. benchmark identity and determinism ----------------------------------------------------


def _identity_runs(free, matched, net):
    centroid = tuple(np.concatenate([t.coords for t in free]).mean(axis=0))
    defaults = {
        "lcss": {"epsilon": 5.0}, "edr": {"epsilon": 5.0}, "erp": {"ref_point": centroid},
        "owd_grid": {"grid": GridSpec(cell_size_lat=5.0, cell_size_lon=5.0)},
        "net_lcss": {"epsilon": 2.0}, "net_edr": {"epsilon": 2.0}, "net_erp": {"gap_vertex": 20},
        "tp": {"lam": 0.5},
    }
    free_runs, net_runs = [], []
    for name, desc in REGISTRY.items():
        prm = dict(defaults.get(name, {}))
        if desc.network:
            prm["network"] = net
            net_runs.append(MeasureRun(name, prm))
        else:
            free_runs.append(MeasureRun(name, prm))
    return free_runs, net_runs


def test_c7_identity_and_determinism():
    t0 = time.perf_counter()
    net = fixtures.example_network()
    free = fixtures.random_walks(80, seed=8, min_len=8, max_len=8)  # equal lengths so ED is defined
    matched = fixtures.random_matched(net, 80, seed=8)
    free_runs, net_runs = _identity_runs(free, matched, net)
    ident = [TransformSpec("identity")]
    rows = []
    for data, runs in ((free, free_runs), (matched, net_runs)):
        qs = [data[i] for i in (0, 17, 42)]
        rows += run_scenario(data, qs, runs, ident, 50, 0, record_timing=False).rows
    measures = sorted(r.measure for r in rows)
    not_one = [r.measure for r in rows if r.hr_at_k != 1.0 or r.error]
    specs = [TransformSpec("sampling", 60), TransformSpec("noise", 40, (1.0, 1.0)), TransformSpec("cardinality", 60)]
    qs = [free[0], free[5]]
    some = [MeasureRun("dtw"), MeasureRun("frechet"), MeasureRun("lcss", {"epsilon": 5.0})]
    csv_a = run_scenario(free, qs, some, specs, 50, 13, record_timing=False).to_csv()
    csv_b = run_scenario(free, qs, some, specs, 50, 13, record_timing=False).to_csv()
    elapsed = time.perf_counter() - t0
    verdict(
        "criterion 7",
        measures == sorted(REGISTRY) and not not_one and csv_a == csv_b,
        f"HR@50 = 1.0 for {len(rows) - len(not_one)}/{len(REGISTRY)} registered measures"
        f"{' (off: ' + ', '.join(not_one) + ')' if not_one else ''}; "
        f"seeded reruns byte-identical: {csv_a == csv_b}; {elapsed:.1f} s",
    )


def test_c8_out_of_scope():
    ACCEPTANCE.append("SKIP criterion 8: real-dataset curves, cluster timings and learned models are out of scope")
    pytest.skip("real-dataset, cluster and learning-based results are not reproducible at desk scale")

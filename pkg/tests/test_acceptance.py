"""End-to-end acceptance gate.

One test per criterion, each printing a single PASS/FAIL line to the
terminal. All numeric results are collected once per run under a fixed
master seed; the final criterion repeats the whole collection and
requires byte-identical serialized results.
"""

import json
import time

import pytest

from treesliced.validate import (
    run_bound,
    run_chain,
    run_cluster,
    run_golden,
    run_nd_kernel,
    run_oracle,
    run_perf,
    run_rank,
)

SEED = 0


def collect(seed):
    """Run every seed-determined suite; keep wall times separately."""
    results = {}
    timings = {}

    t0 = time.perf_counter()
    results["oracle"] = run_oracle(seed, trials=200)
    timings["oracle_s"] = time.perf_counter() - t0

    results["ndkernel"] = run_nd_kernel(seed, families=100, nd_trials=100)
    results["bound"] = run_bound(seed, trials=100)
    results["chain"] = run_chain(seed, trials=100)

    t0 = time.perf_counter()
    results["cluster"] = run_cluster()
    timings["cluster_s"] = time.perf_counter() - t0

    results["golden"] = run_golden()

    t0 = time.perf_counter()
    results["rank"] = run_rank(seed)
    timings["rank_s"] = time.perf_counter() - t0

    values, perf_timings = run_perf(seed)
    results["perf"] = values
    timings.update(perf_timings)
    return results, timings


@pytest.fixture(scope="module")
def run_a():
    return collect(SEED)


def report(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {k:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {k}: {detail}"


def test_criterion_1_closed_form_equals_lp(run_a, capsys):
    results, timings = run_a
    r = results["oracle"]
    ok = r["passed"] and r["max_abs_diff"] <= 1e-9 and timings["oracle_s"] < 30
    report(capsys, 1, ok,
           f"closed-form vs LP on {r['trials']} instances, max |diff| = "
           f"{r['max_abs_diff']:.3g}, {timings['oracle_s']:.1f}s")


def test_criterion_2_negative_definiteness(run_a, capsys):
    r = run_a[0]["ndkernel"]
    ok = (r["max_quadratic_form"] <= 1e-9
          and r["min_centered_eigenvalue"] >= -1e-8
          and r["negative_control_failed"])
    report(capsys, 2, ok,
           f"{r['families']} distance families: max c'Dc = {r['max_quadratic_form']:.3g}, "
           f"min centered eig = {r['min_centered_eigenvalue']:.3g}, control rejected")


def test_criterion_3_kernel_psd_and_divisibility(run_a, capsys):
    r = run_a[0]["ndkernel"]
    ok = r["kernel_min_eigenvalue"] >= -1e-8 and r["max_divisibility_gap"] <= 1e-12
    report(capsys, 3, ok,
           f"kernel min eig = {r['kernel_min_eigenvalue']:.3g} over t in {{0.1, 1, 10}}, "
           f"divisibility gap = {r['max_divisibility_gap']:.3g}")


def test_criterion_4_quantization_bound(run_a, capsys):
    r = run_a[0]["bound"]
    ok = r["passed"] and r["level_identity_exact"] and not r["violations"]
    report(capsys, 4, ok,
           f"bound held on {r['trials']} cloud pairs (max gap {r['max_gap']:.3g}), "
           f"level identity exact = {r['level_identity_exact']}")


def test_criterion_5_chain_tree_is_1d_formula(run_a, capsys):
    r = run_a[0]["chain"]
    ok = r["passed"] and r["max_abs_diff"] <= 1e-9
    report(capsys, 5, ok,
           f"chain-tree vs sorted-projection formula on {r['trials']} instances, "
           f"max |diff| = {r['max_abs_diff']:.3g}")


def test_criterion_6_clustering_2_approximation(run_a, capsys):
    results, timings = run_a
    r = results["cluster"]
    ok = r["passed"] and r["max_ratio"] <= 2.0 + 1e-12 and timings["cluster_s"] < 60
    report(capsys, 6, ok,
           f"{r['cases']} exhaustive cases over {r['point_sets']} point sets, "
           f"max radius ratio = {r['max_ratio']:.6f}, {timings['cluster_s']:.1f}s")


def test_criterion_7_golden_partition(run_a, capsys):
    r = run_a[0]["golden"]
    ok = (r["n_nodes"], r["n_edges"], r["deepest_level"]) == (10, 9, 3)
    report(capsys, 7, ok,
           f"seven-point configuration gives {r['n_nodes']} nodes, "
           f"{r['n_edges']} edges, deepest level {r['deepest_level']}")


def test_criterion_8_rank_trend(run_a, capsys):
    results, timings = run_a
    r = results["rank"]
    ranks = r["mean_ranks"]
    ok = r["passed"] and timings["rank_s"] < 600
    report(capsys, 8, ok,
           f"mean near-neighbor rank {ranks['1']:.2f} at 1 slice vs "
           f"{ranks['12']:.2f} at 12 slices on {r['n_clouds']} clouds, {timings['rank_s']:.1f}s")


def test_criterion_9_speed_over_exact(run_a, capsys):
    results, timings = run_a
    r = results["perf"]
    speedup = timings["speedup"]
    ok = speedup >= 10.0
    report(capsys, 9, ok,
           f"{r['n_slices']}-slice distance on {r['n_support']}-support measures: "
           f"{timings['tsw_median_s'] * 1e3:.1f} ms vs exact {timings['exact_median_s']:.1f} s "
           f"({speedup:.0f}x, median of 5)")


def test_criterion_10_byte_identical_reproduction(run_a, capsys):
    results_a, _ = run_a
    results_b, _ = collect(SEED)
    bytes_a = json.dumps(results_a, sort_keys=True).encode()
    bytes_b = json.dumps(results_b, sort_keys=True).encode()
    ok = bytes_a == bytes_b
    report(capsys, 10, ok,
           f"two full runs serialized to {len(bytes_a)} identical bytes"
           if ok else "reruns diverged")

"""Acceptance gate: eleven end-to-end checks at fixed tolerances.

Each check prints exactly one PASS/FAIL line with its headline numbers
(visible with ``pytest -s`` or in the captured output of a failure).
The three heavy sweeps run once in session fixtures on one worker; the
final check reruns them on eight workers and demands identical counts.
"""

import time

import numpy as np
import pytest

from robustlingam import (
    DiscoveryConfig,
    ScmSpec,
    SimulationSettings,
    StudentT,
    estimate_causal_order,
    estimate_connection_matrix,
    prune_adaptive_lasso,
    repeated_median_slope,
    residuals,
    run_outlier_grid,
    run_simulation,
    sample,
    theil_sen_slope,
)
from robustlingam.independence import distance_correlation, fast_distance_correlation
from robustlingam.slopes import ols_slope


def _check(number, ok, detail):
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


def _brute_theil_sen(x, y):
    slopes = [(y[j] - y[i]) / (x[j] - x[i])
              for i in range(len(x)) for j in range(i + 1, len(x))
              if x[j] != x[i]]
    return float(np.median(slopes))


def _brute_repeated_median(x, y):
    rows = []
    for i in range(len(x)):
        partial = [(y[j] - y[i]) / (x[j] - x[i])
                   for j in range(len(x)) if x[j] != x[i]]
        if partial:
            rows.append(float(np.median(partial)))
    return float(np.median(rows))


def _oracle_corpus(rng, count):
    """Random small samples mixing continuous draws with integer
    lattices, which force duplicate abscissas and duplicate slopes."""
    samples = []
    while len(samples) < count:
        n = int(rng.integers(2, 31))
        kind = len(samples) % 3
        if kind == 0:
            x = rng.standard_normal(n)
            y = rng.standard_normal(n)
        elif kind == 1:
            x = rng.integers(-4, 5, size=n).astype(float)
            y = rng.integers(-4, 5, size=n).astype(float)
        else:
            half = rng.standard_normal((max(1, n // 2), 2))
            pts = np.concatenate([half, half])[:n]
            x, y = pts[:, 0].copy(), pts[:, 1].copy()
        if x.min() == x.max():
            continue
        samples.append((x, y))
    return samples


# --- heavy sweeps shared between their own checks and the worker check

GRID_ARGS = dict(
    base_seed=505, n=500, grid_exponents=(0, 5, 10),
    methods=tuple(DiscoveryConfig(slope=s) for s in ("theil-sen", "repeated-median", "ols")),
    replications=100,
)

FIVE_VAR_SETTINGS = SimulationSettings(
    p=5, sample_sizes=(100,), q=0.6, noise=StudentT(1.0),
    methods=(DiscoveryConfig(slope="theil-sen"), DiscoveryConfig(slope="ols")),
    replications=100, master_seed=0)

TEN_VAR_SETTINGS = SimulationSettings(
    p=10, sample_sizes=(300,), q=0.5, noise=StudentT(1.0),
    methods=(DiscoveryConfig(slope="theil-sen", measure="dcorr"),
             DiscoveryConfig(slope="ols", measure="dcorr")),
    replications=50, master_seed=0)


@pytest.fixture(scope="session")
def contamination_grid_run():
    start = time.perf_counter()
    report = run_outlier_grid(workers=1, **GRID_ARGS)
    return report, time.perf_counter() - start


@pytest.fixture(scope="session")
def five_variable_run():
    start = time.perf_counter()
    report = run_simulation(FIVE_VAR_SETTINGS, workers=1)
    return report, time.perf_counter() - start


@pytest.fixture(scope="session")
def ten_variable_run():
    start = time.perf_counter()
    report = run_simulation(TEN_VAR_SETTINGS, workers=1)
    return report, time.perf_counter() - start


def _counts(report):
    return [{k: v for k, v in cell.items() if k != "seconds"} for cell in report.cells]


def test_1_slope_estimators_match_brute_enumeration():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    mismatches = 0
    for x, y in _oracle_corpus(rng, 200):
        if theil_sen_slope(x, y).value != _brute_theil_sen(x, y):
            mismatches += 1
        if repeated_median_slope(x, y).value != _brute_repeated_median(x, y):
            mismatches += 1
    elapsed = time.perf_counter() - start
    _check(1, mismatches == 0 and elapsed < 5.0,
           f"0 tolerance, {mismatches} mismatches over 200 samples x 2 estimators, {elapsed:.1f}s (< 5s)")


def test_2_slope_equivariances():
    start = time.perf_counter()
    rng = np.random.default_rng(22)
    estimators = {"ols": ols_slope, "theil-sen": theil_sen_slope,
                  "repeated-median": repeated_median_slope}
    worst = 0.0
    for fn in estimators.values():
        for _ in range(100):
            n = int(rng.integers(5, 41))
            x = rng.standard_normal(n) * 2.0
            y = rng.standard_normal(n) * 2.0
            c, s, t = rng.uniform(0.5, 3.0, size=3) * rng.choice([-1.0, 1.0], size=3)
            a, b = rng.uniform(0.5, 3.0, size=2) * rng.choice([-1.0, 1.0], size=2)
            base = fn(x, y).value
            worst = max(worst, abs(fn(x, y + c * x).value - (base + c)))
            worst = max(worst, abs(fn(a * x, b * y).value - (b / a) * base))
            worst = max(worst, abs(fn(x + s, y + t).value - base))
    elapsed = time.perf_counter() - start
    _check(2, worst <= 1e-12 and elapsed < 5.0,
           f"regression/scale/shift max deviation {worst:.2e} (<= 1e-12), "
           f"100 samples x 3 estimators, {elapsed:.1f}s (< 5s)")


def test_3_slope_consistency_under_heavy_tails():
    start = time.perf_counter()
    ts_hits = rm_hits = 0
    for seed in range(100):
        rng = np.random.default_rng([303, seed])
        x = rng.uniform(-3.0, 3.0, size=5000)
        y = 0.7 * x + rng.standard_t(3, size=5000)
        ts_hits += abs(theil_sen_slope(x, y).value - 0.7) <= 0.05
        rm_hits += abs(repeated_median_slope(x, y).value - 0.7) <= 0.05
    elapsed = time.perf_counter() - start
    _check(3, ts_hits >= 95 and rm_hits >= 95 and elapsed < 120.0,
           f"slope 0.7 +- 0.05 at n=5000, t(3) errors: theil-sen {ts_hits}/100, "
           f"repeated-median {rm_hits}/100 (>= 95 each), {elapsed:.0f}s (< 2min)")


def test_4_distance_correlation_fast_matches_naive():
    start = time.perf_counter()
    rng = np.random.default_rng(44)
    worst = 0.0
    for n in (10, 100, 2000):
        for _ in range(50):
            u = rng.standard_normal(n)
            v = 0.3 * u + rng.standard_normal(n)
            worst = max(worst, abs(fast_distance_correlation(u, v).value
                                   - distance_correlation(u, v).value))
    elapsed = time.perf_counter() - start
    _check(4, worst <= 1e-9 and elapsed < 60.0,
           f"max |fast - naive| = {worst:.2e} (<= 1e-9) over 50 pairs at "
           f"n in {{10, 100, 2000}}, {elapsed:.0f}s (< 1min)")


def test_5_contamination_grid_robustness(contamination_grid_run):
    report, elapsed = contamination_grid_run
    per_method = {}
    for cell in report.cells:
        per_method.setdefault(cell["method"], []).append(cell["correct"])
    ts_min = min(per_method["theil-sen+kbi"])
    rm_min = min(per_method["repeated-median+kbi"])
    ols_min = min(per_method["ols+kbi"])
    dcorr_start = time.perf_counter()
    run_outlier_grid(workers=1, **{
        **GRID_ARGS,
        "methods": tuple(DiscoveryConfig(slope=s, measure="dcorr")
                         for s in ("theil-sen", "repeated-median", "ols")),
    })
    dcorr_elapsed = time.perf_counter() - dcorr_start
    ok = (ts_min >= 95 and rm_min >= 95 and ols_min <= 50
          and elapsed < 1800.0 and dcorr_elapsed < 180.0)
    _check(5, ok,
           f"per-cell minima over 36 cells x 100 reps: theil-sen+kbi {ts_min} (>= 95), "
           f"repeated-median+kbi {rm_min} (>= 95), ols+kbi worst cell {ols_min} (<= 50); "
           f"kbi grid {elapsed:.0f}s (< 30min), dcorr grid {dcorr_elapsed:.0f}s (< 3min)")


def test_6_five_variable_heavy_tail_recovery(five_variable_run):
    report, elapsed = five_variable_run
    rates = {c["method"]: c["correct"] / c["replications"] for c in report.cells}
    ts, ols = rates["theil-sen+kbi"], rates["ols+kbi"]
    _check(6, ts >= 0.85 and ts - ols >= 0.10 and elapsed < 900.0,
           f"p=5, n=100, t(1), 100 reps: theil-sen+kbi {ts:.2f} (>= 0.85), "
           f"ols+kbi {ols:.2f}, gap {ts - ols:.2f} (>= 0.10), {elapsed:.0f}s (< 15min)")


def test_7_ten_variable_heavy_tail_recovery(ten_variable_run):
    report, elapsed = ten_variable_run
    rates = {c["method"]: c["correct"] / c["replications"] for c in report.cells}
    ts, ols = rates["theil-sen+dcorr"], rates["ols+dcorr"]
    _check(7, ts - ols >= 0.15 and elapsed < 1200.0,
           f"p=10, n=300, t(1), 50 reps, dcorr: theil-sen {ts:.2f}, ols {ols:.2f}, "
           f"gap {ts - ols:.2f} (>= 0.15), {elapsed:.0f}s (< 20min)")


def test_8_exogenous_variable_wins_first_round():
    start = time.perf_counter()
    config = DiscoveryConfig(slope="theil-sen")
    hits = 0
    for seed in range(200):
        rng = np.random.default_rng([808, seed])
        mags = rng.uniform(0.1, 0.9, size=2)
        signs = np.where(rng.random(2) < 0.5, -1.0, 1.0)
        weights = np.zeros((3, 3))
        weights[1, 0] = mags[0] * signs[0]
        weights[2, 1] = mags[1] * signs[1]
        spec = ScmSpec(order=np.arange(3), weights=weights, noise=(StudentT(2.0),) * 3)
        data = sample(spec, 2000, rng).values
        order, _ = estimate_causal_order(data, config)
        hits += order[0] == 0
    elapsed = time.perf_counter() - start
    _check(8, hits >= 180,
           f"true source is the round-1 argmin in {hits}/200 seeded 3-chains "
           f"(>= 180), t(2), n=2000, theil-sen+kbi, {elapsed:.0f}s")


def test_9_peeling_preserves_remaining_order_recovery():
    start = time.perf_counter()
    config = DiscoveryConfig(slope="theil-sen", measure="dcorr")
    peel_hits = fresh_hits = 0
    for seed in range(200):
        rng = np.random.default_rng([909, seed])
        mags = rng.uniform(0.1, 0.9, size=2)
        signs = np.where(rng.random(2) < 0.5, -1.0, 1.0)
        w21, w32 = mags * signs
        weights = np.zeros((3, 3))
        weights[1, 0], weights[2, 1] = w21, w32
        spec = ScmSpec(order=np.arange(3), weights=weights, noise=(StudentT(2.0),) * 3)
        data = sample(spec, 5000, rng).values
        peeled = residuals(data[:, 0], data[:, 1:], estimator="theil-sen")
        order, _ = estimate_causal_order(peeled, config)
        peel_hits += order == [0, 1]
        sub = np.zeros((2, 2))
        sub[1, 0] = w32
        fresh_spec = ScmSpec(order=np.arange(2), weights=sub, noise=(StudentT(2.0),) * 2)
        fresh = sample(fresh_spec, 5000, rng).values
        order, _ = estimate_causal_order(fresh, config)
        fresh_hits += order == [0, 1]
    gap = abs(peel_hits - fresh_hits) / 200.0
    elapsed = time.perf_counter() - start
    _check(9, gap <= 0.05,
           f"peel-then-discover {peel_hits}/200 vs fresh 2-variable model "
           f"{fresh_hits}/200, gap {gap:.3f} (<= 0.05), {elapsed:.0f}s")


def test_10_adaptive_lasso_recovers_true_support():
    start = time.perf_counter()
    config = DiscoveryConfig()
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng([1010, seed])
        predictors = rng.standard_normal((5000, 5))
        response = 0.6 * predictors[:, 2] + 0.2 * rng.standard_normal(5000)
        data = np.column_stack([predictors, response])
        order = list(range(6))
        dense = estimate_connection_matrix(data, order)
        pruned = prune_adaptive_lasso(data, order, dense, config)
        hits += set(np.nonzero(pruned[5])[0]) == {2}
    elapsed = time.perf_counter() - start
    _check(10, hits >= 90 and elapsed < 120.0,
           f"one true edge among 5 predecessors, n=5000: exact support in "
           f"{hits}/100 seeds (>= 90), {elapsed:.0f}s (< 2min)")


def test_11_counts_identical_across_worker_counts(contamination_grid_run,
                                                  five_variable_run,
                                                  ten_variable_run):
    grid_8 = run_outlier_grid(workers=8, **GRID_ARGS)
    five_8 = run_simulation(FIVE_VAR_SETTINGS, workers=8)
    ten_8 = run_simulation(TEN_VAR_SETTINGS, workers=8)
    same = (_counts(contamination_grid_run[0]) == _counts(grid_8)
            and _counts(five_variable_run[0]) == _counts(five_8)
            and _counts(ten_variable_run[0]) == _counts(ten_8))
    _check(11, same,
           "contamination grid, 5-variable and 10-variable sweeps: counts at "
           "8 workers identical to 1 worker" if same else
           "count mismatch between 1-worker and 8-worker runs")

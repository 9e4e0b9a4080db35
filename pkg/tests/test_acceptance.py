"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with the measured quantities (run with ``pytest -s`` to see
them).  Statistical criteria run on fixed seed blocks; where the criterion
text allows a retry with a fresh block, the test implements exactly that.
"""

import itertools
import json
import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

import btlseg as b
from btlseg import (
    ChangeSpec,
    ComparisonGraph,
    IntervalCache,
    ObservationSeries,
    Scenario,
    Segmentation,
    SolverConfig,
    WbsConfig,
)
from btlseg.wbs import _ScanContext
from conftest import random_series, random_theta

# grid shared by the dynamic-programming penalty and the segmentation
# thresholds (geometric, ratio ~1.6) used by the desk-scale statistical runs
CV_GRID = [8.0, 13.0, 20.0, 32.0, 50.0, 80.0]
# the n=20 desk-scale run needs a denser shared grid: the penalty window
# between over- and under-splitting narrows as the per-pair sample thins
CV_GRID_DESK2 = [8.0, 12.0, 17.0, 24.0, 30.0, 38.0, 55.0, 80.0]
FAST_SOLVER = SolverConfig(grad_tol=1e-6)
CHANGES_I_II_III = (
    ChangeSpec("type1_reverse"),
    ChangeSpec("type2_block_reverse"),
    ChangeSpec("type3_block_exchange"),
)


def report(num, text):
    print(f"\n[criterion {num:02d}] {text}")


def test_criterion_01_dp_exactness_vs_enumeration():
    """DP objective equals exhaustive partition enumeration on 25 instances."""
    rng = np.random.default_rng(101)
    solver = SolverConfig(grad_tol=1e-12)
    worst = 0.0
    for _ in range(25):
        t_max = int(rng.integers(6, 13))
        theta = random_theta(rng, 3, 1.0)
        series = random_series(rng, n=3, t_max=t_max, theta=theta)
        cache = IntervalCache()
        cost_of = {}
        for a in range(1, t_max + 1):
            for e in range(a, t_max + 1):
                cost_of[(a, e)] = b.interval_objective(series, (a, e), solver, cache)
        for gamma in (0.1, 1.0, 5.0):
            _, trace = b.dp_detect(series, gamma, solver, min_seg=1)
            best = np.inf
            for mask in range(2 ** (t_max - 1)):
                bounds = [1] + [t + 2 for t in range(t_max - 1) if (mask >> t) & 1] + [t_max + 1]
                cost = gamma * (len(bounds) - 1)
                for a, e in zip(bounds, bounds[1:]):
                    cost += cost_of[(a, e - 1)]
                best = min(best, cost)
            worst = max(worst, abs(trace.bellman[-1] - best))
            assert abs(trace.bellman[-1] - best) <= 1e-9
    report(1, f"PASS dp == enumeration on 25 instances, worst gap {worst:.2e}")


def test_criterion_02_derivatives_match_finite_differences():
    """Gradient and Hessian agree with central finite differences."""
    rng = np.random.default_rng(202)
    worst_g, worst_h = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(3, 7))
        series = random_series(rng, n=n, t_max=int(rng.integers(12, 40)))
        theta = random_theta(rng, n, 1.0)
        interval = (1, series.t_max)
        w, l = series.slice_arrays(*interval)

        def nll_at(scores):
            z = scores[w] - scores[l]
            return float(np.logaddexp(0.0, -z).sum())

        grad = b.grad_neg_log_lik(theta, series, interval)
        h = 1e-5
        fd_grad = np.zeros(n)
        for i in range(n):
            up, dn = theta.scores.copy(), theta.scores.copy()
            up[i] += h
            dn[i] -= h
            fd_grad[i] = (nll_at(up) - nll_at(dn)) / (2 * h)
        rel_g = np.linalg.norm(grad - fd_grad) / max(np.linalg.norm(fd_grad), 1e-12)
        worst_g = max(worst_g, rel_g)
        assert rel_g <= 1e-5

        hess = b.hess_neg_log_lik(theta, series, interval)
        hstep = 1e-4
        fd_hess = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                pp, pm, mp, mm = (theta.scores.copy() for _ in range(4))
                pp[i] += hstep; pp[j] += hstep
                pm[i] += hstep; pm[j] -= hstep
                mp[i] -= hstep; mp[j] += hstep
                mm[i] -= hstep; mm[j] -= hstep
                fd_hess[i, j] = (nll_at(pp) - nll_at(pm) - nll_at(mp) + nll_at(mm)) / (
                    4 * hstep**2
                )
        rel_h = np.linalg.norm(hess - fd_hess) / max(np.linalg.norm(fd_hess), 1e-12)
        worst_h = max(worst_h, rel_h)
        assert rel_h <= 1e-3
    report(2, f"PASS 100 instances, worst rel err grad {worst_g:.2e} hess {worst_h:.2e}")


def test_criterion_03_probability_matrix_sandwich():
    """Score/probability distance sandwich across sizes and dynamic ranges."""
    rng = np.random.default_rng(303)
    checked = 0
    for n, bound in itertools.product((3, 10, 50), (0.5, 1.0, 2.0)):
        for _ in range(1000):
            t1 = random_theta(rng, n, bound)
            t2 = random_theta(rng, n, bound)
            lhs, mid, rhs = b.prob_matrix_bounds_check(t1, t2)
            assert lhs <= mid + 1e-12
            assert mid <= rhs + 1e-12
            checked += 1
    report(3, f"PASS sandwich held on {checked} random pairs")


def test_criterion_04_setting_one_desk_scale():
    """Full pipeline at n=10, K=3, spacing 500 over 10 seeds with CV tuning."""
    exact = 0
    errors = []
    for seed in range(10):
        sc = Scenario(n=10, delta_spacing=500, changes=CHANGES_I_II_III, rng_seed=9000 + seed)
        series, truth, _ = b.generate(sc)
        res = b.cv_select(series, CV_GRID, "dplr", FAST_SOLVER, n_jobs=2)
        h = b.hausdorff(res.segmentation, truth)
        errors.append(h)
        exact += b.count_k(res.segmentation, truth) == "exact"
    med = float(np.median(errors))
    assert exact >= 8, f"exact K in only {exact}/10 runs"
    assert med <= 40, f"median Hausdorff {med}"
    report(4, f"PASS K exact in {exact}/10 runs, median Hausdorff {med}")


def _desk_setting_two_block(seed_base):
    hd, hw = [], []
    for seed in range(5):
        sc = Scenario(n=20, delta_spacing=400, changes=CHANGES_I_II_III, rng_seed=seed_base + seed)
        series, truth, _ = b.generate(sc)
        rd = b.cv_select(series, CV_GRID_DESK2, "dplr", FAST_SOLVER, n_jobs=2)
        rw = b.cv_select(
            series, CV_GRID_DESK2, "wbs-glr", FAST_SOLVER,
            wbs_config=WbsConfig(intervals_m=50, rng_seed=seed), n_jobs=2,
        )
        hd.append(b.hausdorff(rd.segmentation, truth))
        hw.append(b.hausdorff(rw.segmentation, truth))
    return float(np.median(hd)), float(np.median(hw))


def test_criterion_05_dplr_beats_wbs_glr_desk_scale():
    """Median Hausdorff comparison on setting-two data; one retry block allowed."""
    med_d, med_w = _desk_setting_two_block(4000)
    outcome = f"block A medians dplr={med_d} wbs={med_w}"
    if not med_d < med_w:
        med_d, med_w = _desk_setting_two_block(6200)
        outcome += f"; retry block B medians dplr={med_d} wbs={med_w}"
    assert med_d < med_w, outcome
    report(5, f"PASS {outcome}")


def test_criterion_06_refinement_non_degradation():
    """Refining perturbed change points does not worsen the median error."""
    rng = np.random.default_rng(606)
    before, after = [], []
    for seed in range(20):
        sc = Scenario(n=10, delta_spacing=500, changes=CHANGES_I_II_III, rng_seed=7000 + seed)
        series, truth, _ = b.generate(sc)
        signs = rng.choice([-1, 1], size=truth.k)
        prelim = Segmentation(
            tuple(int(c + 50 * s) for c, s in zip(truth.change_points, signs)),
            series.t_max,
        )
        refined = b.refine(series, prelim, FAST_SOLVER)
        before.append(b.hausdorff(prelim, truth))
        after.append(b.hausdorff(refined, truth))
    med_before, med_after = float(np.median(before)), float(np.median(after))
    assert med_after <= med_before, (med_before, med_after)
    report(6, f"PASS median error {med_before} -> {med_after} after refinement")


SST_COUNTER_P = [["0.5", "0.6", "0.8"], ["0.4", "0.5", "0.7"], ["0.2", "0.3", "0.5"]]
SST_COUNTER_Q = [["0.5", "0.55", "0.85"], ["0.45", "0.5", "0.65"], ["0.15", "0.35", "0.5"]]


def _series_from_prob_matrix(p_mat, q_mat, t_max, eta, rng):
    graph = ComparisonGraph.complete(3)
    edges = np.asarray(graph.edge_list())
    idx = rng.integers(0, len(edges), size=t_max)
    a, c = edges[idx, 0], edges[idx, 1]
    flip = rng.random(t_max) < 0.5
    a, c = np.where(flip, c, a), np.where(flip, a, c)
    probs = np.where(np.arange(t_max) < eta - 1, p_mat[a, c], q_mat[a, c])
    a_wins = rng.random(t_max) < probs
    return ObservationSeries(graph, np.where(a_wins, a, c), np.where(a_wins, c, a))


def test_criterion_07_borda_counter_example():
    """Exact zero row sums for the counter-example, and the scan contrast.

    The population tally CUSUM is identically zero for these matrices, so
    its empirical peak cannot localize; the two-sample statistic is supposed
    to localize within a tenth of the spacing in at least 7 of 10 seeds.
    """
    rows = [
        sum(Fraction(SST_COUNTER_P[i][j]) - Fraction(SST_COUNTER_Q[i][j]) for j in range(3))
        for i in range(3)
    ]
    assert rows == [Fraction(0), Fraction(0), Fraction(0)]

    p_mat = np.array([[float(x) for x in row] for row in SST_COUNTER_P])
    q_mat = np.array([[float(x) for x in row] for row in SST_COUNTER_Q])
    t_max, eta = 4000, 2001
    spacing = 2000
    joint = 0
    table = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        series = _series_from_prob_matrix(p_mat, q_mat, t_max, eta, rng)
        borda = _ScanContext(series, WbsConfig(statistic="borda"), FAST_SOLVER).scan(1, t_max)
        sst = _ScanContext(series, WbsConfig(statistic="sst"), FAST_SOLVER).scan(1, t_max)
        err_b = abs(borda.split - eta)
        err_s = abs(sst.split - eta)
        table.append((err_b, err_s))
        joint += (err_b > spacing / 4) and (err_s <= spacing / 10)
    report(
        7,
        ("PASS" if joint >= 7 else "FAIL")
        + f" joint contrast in {joint}/10 seeds; (borda_err, sst_err) per seed: {table}",
    )
    assert joint >= 7, f"joint success {joint}/10; per-seed errors {table}"


def test_criterion_08_sst_sparse_sides_identity():
    """With every pair seen at most once per side the statistic is exactly 0."""
    graph = ComparisonGraph.complete(5)
    winners = [0, 2, 4, 1, 3, 0, 1, 2]
    losers = [1, 3, 0, 2, 4, 2, 4, 0]
    series = ObservationSeries(graph, winners, losers)
    value = b.sst_stat(series, (1, 4), (5, 8))
    assert value == 0.0
    report(8, "PASS sparse-side statistic is exactly 0")


def test_criterion_09_stationary_mle_rate():
    """Quadrupling the sample shrinks the constrained MLE error enough."""
    bound = math.log(9.0) / 2
    cfg = SolverConfig(mode="constrained", bound_b=bound, grad_tol=1e-8)
    errs = {2000: [], 8000: []}
    for seed in range(20):
        sc = Scenario(n=10, delta_spacing=8000, rng_seed=1234 + seed)
        series, _, thetas = b.generate(sc)
        star = thetas[0].scores
        for m in (2000, 8000):
            fit = b.fit_interval(series, (1, m), cfg)
            errs[m].append(float(np.linalg.norm(fit.theta_hat.scores - star)))
    med_small = float(np.median(errs[2000]))
    med_large = float(np.median(errs[8000]))
    assert med_large <= 0.6 * med_small, (med_small, med_large)
    report(9, f"PASS median error {med_small:.4f} @2000 -> {med_large:.4f} @8000")


def _run_cli(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "btlseg", *args], capture_output=True, cwd=cwd
    )
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_criterion_10_cli_determinism(tmp_path):
    """Every subcommand produces byte-identical output across two runs."""
    config = tmp_path / "scenario.cfg"
    config.write_text(
        "n = 6\ndelta = 60\nchanges = I,random\np = 0.9\nseed = 13\ngraph = complete\n"
    )

    def run_everything(tag):
        # relative paths inside a per-run working directory keep the
        # byte-comparison about content, not about the directory name
        d = tmp_path / tag
        d.mkdir()
        (d / "scenario.cfg").write_text(config.read_text())
        outputs = {}
        outputs["simulate"] = _run_cli(
            ["simulate", "--config", "scenario.cfg", "--out", "obs.csv"], d
        )
        outputs["obs.csv"] = (d / "obs.csv").read_bytes()
        outputs["truth"] = (d / "obs.truth.json").read_bytes()
        outputs["detect"] = _run_cli(
            ["detect", "--in", "obs.csv", "--method", "dplr", "--gamma", "4",
             "--out", "est.json", "--min-seg", "2"], d,
        )
        outputs["est.json"] = (d / "est.json").read_bytes()
        outputs["detect-wbs"] = _run_cli(
            ["detect", "--in", "obs.csv", "--method", "wbs-sst", "--gamma", "3",
             "--seed", "9", "--wbs-m", "25", "--out", "wbs.json"], d,
        )
        outputs["wbs.json"] = (d / "wbs.json").read_bytes()
        outputs["tune"] = _run_cli(
            ["tune", "--in", "obs.csv", "--method", "dp", "--gamma-grid", "2,8,1e9",
             "--out", "cv.csv", "--min-seg", "2"], d,
        )
        outputs["cv.csv"] = (d / "cv.csv").read_bytes()
        outputs["evaluate"] = _run_cli(
            ["evaluate", "--est", "est.json", "--truth", "obs.truth.json"], d
        )
        outputs["fit"] = _run_cli(["fit", "--in", "obs.csv", "--interval", "1:60"], d)
        return outputs

    first = run_everything("run1")
    second = run_everything("run2")
    assert set(first) == set(second)
    for key in first:
        assert first[key] == second[key], f"output {key} differs between runs"
    report(10, f"PASS {len(first)} outputs byte-identical across runs")

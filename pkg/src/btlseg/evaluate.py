"""Localization error metrics and cross-validation tuning.

Tuning follows an odd/even protocol: detect on the odd-indexed half, fit
each induced interval on the even-indexed half, and keep the penalty with
the smallest total test negative log-likelihood.  Change points selected on
the training half are reported back on the original time axis.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dp import Segmentation, dp_detect
from .model import ComparisonGraph, ObservationSeries, laplacian_spectrum, neg_log_lik, p_lb
from .refine import dplr_detect
from .solver import IntervalCache, SolverConfig, fit_interval
from .wbs import WbsConfig, wbs_detect

METHODS = ("dp", "dplr", "wbs-glr", "wbs-sst", "wbs-borda")


def hausdorff(est: Segmentation, truth: Segmentation) -> float:
    """Hausdorff distance between two change point sets.

    Zero when both are empty, infinite when exactly one is empty.
    """
    a = np.asarray(est.change_points, dtype=float)
    b = np.asarray(truth.change_points, dtype=float)
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return math.inf
    dist = np.abs(a[:, None] - b[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def count_k(est: Segmentation, truth: Segmentation) -> str:
    """Categorize the estimated change point count: 'under', 'exact' or 'over'."""
    if est.k < truth.k:
        return "under"
    if est.k > truth.k:
        return "over"
    return "exact"


def odd_even_split(series: ObservationSeries) -> tuple[ObservationSeries, ObservationSeries]:
    """Split into odd-time (train) and even-time (test) halves, re-indexed 1..len.

    Train index k corresponds to original time 2k - 1 and test index k to
    original time 2k.
    """
    if series.t_max < 2:
        raise ValueError("series must contain at least two observations")
    odd = np.arange(1, series.t_max + 1, 2)
    even = np.arange(2, series.t_max + 1, 2)
    return series.subseries(odd), series.subseries(even)


def original_time_of_train(k: int) -> int:
    return 2 * k - 1


def original_time_of_test(k: int) -> int:
    return 2 * k


def _segmentation_on_axis(cps, t_max: int) -> Segmentation:
    kept = sorted({int(c) for c in cps if 1 < c <= t_max})
    return Segmentation(change_points=tuple(kept), t_max=t_max)


@dataclass(frozen=True)
class CvResult:
    """Selected penalty, its segmentation on the original axis, and the loss table."""

    best_gamma: float
    segmentation: Segmentation
    table: tuple[tuple[float, int, float], ...]


def _detect(series, method, gamma, solver, wbs_config, min_seg, max_lookback):
    if method == "dp":
        seg, _ = dp_detect(series, gamma, solver, min_seg=min_seg, max_lookback=max_lookback)
        return seg
    if method == "dplr":
        return dplr_detect(series, gamma, solver, min_seg=min_seg, max_lookback=max_lookback)
    if method.startswith("wbs-"):
        cfg = wbs_config or WbsConfig()
        cfg = dataclasses.replace(cfg, statistic=method[4:], threshold_gamma=gamma)
        return wbs_detect(series, cfg, solver)
    raise ValueError(f"unknown method {method!r}")


def cv_select(
    series: ObservationSeries,
    gamma_grid,
    method: str,
    solver: SolverConfig | None = None,
    wbs_config: WbsConfig | None = None,
    min_seg: int | None = None,
    max_lookback: int | None = None,
    n_jobs: int = 1,
) -> CvResult:
    """Choose the penalty from a grid by odd/even cross-validation.

    Every grid point is evaluated (detect on train, score on test); ties in
    test loss go to the smaller penalty.  The same grid drives both the
    dynamic-programming penalty and the segmentation thresholds, so
    competing methods are tuned on one candidate list.
    """
    grid = [float(g) for g in gamma_grid]
    if not grid:
        raise ValueError("gamma grid must be nonempty")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    solver = solver or SolverConfig()
    train, test = odd_even_split(series)
    train_cache = IntervalCache()

    def run(gamma: float):
        return _detect(train, method, gamma, solver, wbs_config, min_seg, max_lookback)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            train_segs = list(pool.map(run, grid))
    else:
        train_segs = [run(g) for g in grid]

    rows = []
    best = None
    for gamma, train_seg in zip(grid, train_segs):
        loss = _held_out_loss(train, test, train_seg, solver, train_cache)
        rows.append((gamma, train_seg.k, float(loss)))
        key = (loss, gamma)
        if best is None or key < best[0]:
            original = _segmentation_on_axis(
                [original_time_of_train(c) for c in train_seg.change_points],
                series.t_max,
            )
            best = (key, gamma, original)
    return CvResult(best_gamma=best[1], segmentation=best[2], table=tuple(rows))


def _held_out_loss(train, test, train_seg: Segmentation, solver, train_cache) -> float:
    """Score a training-half segmentation on the held-out half.

    Scores are fitted on each training interval and their negative
    log-likelihood is evaluated on the matching test interval.  Refitting on
    the test half instead would reward every extra split unconditionally
    (splitting can only improve an in-sample fit), making the selection
    degenerate.
    """
    loss = 0.0
    for a, bnd in train_seg.intervals():
        lo, hi = a, min(bnd, test.t_max)
        if lo > hi:
            continue
        fit = fit_interval(train, (a, bnd), solver, train_cache)
        loss += neg_log_lik(fit.theta_hat, test, (lo, hi))
    return loss


def theory_gamma(
    n: int, k_guess: int, bound_b: float, graph: ComparisonGraph, t_max: int
) -> float:
    """Theory-scale penalty ``p_lb^-2 (K+1) n d_max / lambda2 * log(T n)``.

    The leading constant is set to 1; the value is a diagnostic scale, not a
    tuned penalty, and is never applied automatically.
    """
    if n < 2 or k_guess < 0 or t_max < 2:
        raise ValueError("invalid arguments")
    lambda2, _, d_max, _ = laplacian_spectrum(graph)
    return p_lb(bound_b) ** -2 * (k_guess + 1) * n * d_max / lambda2 * math.log(t_max * n)

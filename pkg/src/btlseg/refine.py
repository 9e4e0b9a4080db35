"""Local refinement of preliminary change point estimates.

Each preliminary change point is re-estimated by scanning a widened working
window (weighted 2/3 toward the flanking estimates) for the split that
minimizes the sum of the two one-sided maximum-likelihood fits.
"""

from __future__ import annotations

import warnings

import numpy as np

from .dp import Segmentation, dp_detect
from .model import ObservationSeries
from .solver import (
    IntervalCache,
    PrefixCounts,
    SolverConfig,
    interval_objective,
    ridge_fit_batch,
)


def _window(prev: int, cur: int, nxt: int, t_max: int) -> tuple[int, int]:
    """Scan window endpoints, floored/ceiled outward and clamped to [1, T]."""
    s = (2 * prev + cur) // 3
    e = -((-(cur + 2 * nxt)) // 3)
    return max(1, s), min(t_max, e)


def refine(
    series: ObservationSeries,
    prelim: Segmentation,
    solver: SolverConfig | None = None,
    stride: int = 1,
) -> Segmentation:
    """Re-estimate each preliminary change point by a two-sample likelihood scan.

    The candidate minimizing the combined left/right fit is returned for
    each window, ties broken toward the earliest time.  ``stride`` > 1
    subsamples the candidate grid for very long windows.
    """
    solver = solver or SolverConfig()
    if prelim.t_max != series.t_max:
        raise ValueError("segmentation does not match the series length")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    if prelim.k == 0:
        return prelim
    t_max = series.t_max
    anchors = (1, *prelim.change_points, t_max)
    prefix = PrefixCounts(series) if solver.mode == "ridge" else None
    cache = IntervalCache()
    refined = []
    for k in range(1, prelim.k + 1):
        s, e = _window(anchors[k - 1], anchors[k], anchors[k + 1], t_max)
        if e - s < 3:
            raise ValueError(
                f"scan window ({s}, {e}) around change point {anchors[k]} is too short"
            )
        cands = np.arange(s + 1, e, dtype=np.int64)
        if stride > 1:
            cands = cands[::stride]
        if solver.mode == "ridge":
            obj = _scan_ridge(prefix, s, e, cands, solver)
        else:
            obj = np.array(
                [
                    interval_objective(series, (s + 1, int(c)), solver, cache)
                    + interval_objective(series, (int(c) + 1, e), solver, cache)
                    for c in cands
                ]
            )
        best = int(cands[int(np.argmin(obj))])
        refined.append(best + 1)
    out = sorted(refined)
    deduped = sorted(set(out))
    if len(deduped) != len(out):
        warnings.warn("refined change points collided; duplicates collapsed")
    return Segmentation(change_points=tuple(deduped), t_max=t_max)


def _scan_ridge(
    prefix: PrefixCounts, s: int, e: int, cands: np.ndarray, solver: SolverConfig
) -> np.ndarray:
    """Two-sample scan objective for every candidate split, fit in two batches.

    All left fits share the window start and all right fits share the window
    end; both batches are warm-started from the joint fit of the window.
    """
    joint_theta, _, _, _ = ridge_fit_batch(
        prefix.window(s + 1, e),
        lam=solver.ridge_lambda,
        grad_tol=solver.grad_tol,
        max_iter=solver.max_iter,
    )
    warm = np.broadcast_to(joint_theta[0], (len(cands), prefix.n))
    left_counts = prefix.windows_fixed_start(s + 1, cands)
    right_counts = prefix.windows_fixed_end(cands + 1, e)
    _, left_nll, _, _ = ridge_fit_batch(
        left_counts, warm, lam=solver.ridge_lambda,
        grad_tol=solver.grad_tol, max_iter=solver.max_iter,
    )
    _, right_nll, _, _ = ridge_fit_batch(
        right_counts, warm, lam=solver.ridge_lambda,
        grad_tol=solver.grad_tol, max_iter=solver.max_iter,
    )
    return left_nll + right_nll


def dplr_detect(
    series: ObservationSeries,
    gamma: float,
    solver: SolverConfig | None = None,
    min_seg: int | None = None,
    max_lookback: int | None = None,
) -> Segmentation:
    """Dynamic-programming detection followed by local refinement."""
    prelim, _ = dp_detect(series, gamma, solver, min_seg=min_seg, max_lookback=max_lookback)
    return refine(series, prelim, solver)

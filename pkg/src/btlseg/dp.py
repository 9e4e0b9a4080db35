"""Exact penalized dynamic-programming segmentation.

Minimizes the total interval negative log-likelihood plus ``gamma`` times
the number of intervals, over all admissible partitions of the time course.
Change points are reported as the first time index of each new regime.

The Bellman table is indexed by segment boundaries 0..T, where boundary
``l`` separates observation ``l`` from ``l + 1``; ``bellman[r]`` is the
optimal penalized cost of the first ``r`` observations and ``bellman[0]``
is 0.  A partition with K change points therefore costs the likelihood sum
plus ``gamma * (K + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ObservationSeries
from .solver import (
    IntervalCache,
    PrefixCounts,
    SolverConfig,
    interval_objective,
    nll_from_counts,
    project_zero_sum_box,
    ridge_fit_batch,
)


@dataclass(frozen=True)
class Segmentation:
    """Ordered change points partitioning the time course ``[1, t_max]``.

    Each change point is the first time index of a new regime, so values lie
    in ``(1, t_max]``; an empty tuple means no change.
    """

    change_points: tuple[int, ...]
    t_max: int

    def __post_init__(self):
        cps = tuple(int(c) for c in self.change_points)
        if self.t_max < 1:
            raise ValueError("t_max must be positive")
        if any(not (1 < c <= self.t_max) for c in cps):
            raise ValueError(f"change points must lie in (1, {self.t_max}]")
        if any(a >= b for a, b in zip(cps, cps[1:])):
            raise ValueError("change points must be strictly increasing")
        object.__setattr__(self, "change_points", cps)

    @property
    def k(self) -> int:
        return len(self.change_points)

    def intervals(self) -> list[tuple[int, int]]:
        """Inclusive regime intervals induced by the change points."""
        bounds = [1, *self.change_points, self.t_max + 1]
        return [(bounds[i], bounds[i + 1] - 1) for i in range(len(bounds) - 1)]


@dataclass(frozen=True)
class DpTrace:
    """Bellman values and backpointers of one dynamic-programming run.

    Arrays have length ``t_max + 1`` and are indexed by segment boundary;
    ``backpointers[0] == -1`` and the chain from ``t_max`` always reaches 0.
    """

    bellman: np.ndarray
    backpointers: np.ndarray


def default_min_seg(n: int) -> int:
    """Shortest segment the detector will consider by default."""
    return max(2, n // 4)


def _candidate_starts(r: int, min_seg: int, max_lookback: int | None) -> np.ndarray:
    """Admissible left boundaries for a segment ending at boundary ``r``."""
    lo = 0 if max_lookback is None else max(0, r - max_lookback)
    if r - min_seg < 0:
        return np.empty(0, dtype=np.int64)
    ls = np.arange(max(lo, min_seg), r - min_seg + 1, dtype=np.int64)
    if lo == 0 and min_seg > 0:
        ls = np.concatenate(([0], ls)) if r >= min_seg else ls
    return ls


def dp_detect(
    series: ObservationSeries,
    gamma: float,
    solver: SolverConfig | None = None,
    min_seg: int | None = None,
    max_lookback: int | None = None,
) -> tuple[Segmentation, DpTrace]:
    """Exact search over all partitions by dynamic programming.

    ``min_seg`` skips candidate splits that would produce a segment shorter
    than that many observations (1 reproduces the unrestricted search);
    ``max_lookback`` optionally caps segment length to bound the quadratic
    cost on long series.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    solver = solver or SolverConfig()
    t_max = series.t_max
    if t_max < 2:
        raise ValueError("series must contain at least two observations")
    if min_seg is None:
        min_seg = default_min_seg(series.n)
    if min_seg < 1:
        raise ValueError("min_seg must be at least 1")
    min_seg = min(min_seg, t_max)

    if solver.mode == "ridge":
        bell, back = _dp_ridge(series, gamma, solver, min_seg, max_lookback)
    else:
        bell, back = _dp_generic(series, gamma, solver, min_seg, max_lookback)

    if not np.isfinite(bell[t_max]):
        raise ArithmeticError("dynamic program found no admissible partition")
    boundaries = []
    k = t_max
    for _ in range(t_max + 1):
        k = int(back[k])
        if k <= 0:
            break
        boundaries.append(k)
    cps = tuple(sorted(b + 1 for b in boundaries))
    trace = DpTrace(bellman=bell, backpointers=back)
    return Segmentation(change_points=cps, t_max=t_max), trace


def _dp_ridge(series, gamma, solver, min_seg, max_lookback):
    """Vectorized Bellman sweep.

    All candidate fits for a fixed right boundary are solved in one batched
    Newton call, warm-started from the fits of the same left boundaries one
    step earlier.  Entry windows (the shortest admissible segment at each
    left boundary) are pre-fit in one upfront batch so every candidate joins
    the sweep already converged.
    """
    t_max = series.t_max
    n = series.n
    lam = solver.ridge_lambda
    prefix = PrefixCounts(series)
    bell = np.full(t_max + 1, np.inf)
    bell[0] = 0.0
    back = np.full(t_max + 1, -1, dtype=np.int64)
    bound = solver.bound_b

    warm = np.zeros((t_max, n))
    entry_ls = np.arange(0, t_max - min_seg + 1, dtype=np.int64)
    for lo in range(0, entry_ls.size, 4096):
        chunk = entry_ls[lo : lo + 4096]
        counts = prefix.windows_sliding(chunk + 1, min_seg)
        thetas, _, _, _ = ridge_fit_batch(
            counts, lam=lam, grad_tol=solver.grad_tol, max_iter=solver.max_iter
        )
        warm[chunk] = thetas

    for r in range(min_seg, t_max + 1):
        ls = _candidate_starts(r, min_seg, max_lookback)
        if ls.size == 0:
            continue
        counts = prefix.windows_fixed_end(ls + 1, r)
        thetas, nlls, _, _ = ridge_fit_batch(
            counts,
            warm[ls],
            lam=lam,
            grad_tol=solver.grad_tol,
            max_iter=solver.max_iter,
        )
        over = np.max(np.abs(thetas - thetas.mean(axis=1, keepdims=True)), axis=1) > bound
        if np.any(over):
            for idx in np.nonzero(over)[0]:
                proj = project_zero_sum_box(thetas[idx], bound)
                thetas[idx] = proj
                nlls[idx] = nll_from_counts(counts[idx], proj)
        warm[ls] = thetas
        costs = bell[ls] + gamma + nlls
        j = int(np.argmin(costs))
        if costs[j] < bell[r]:
            bell[r] = costs[j]
            back[r] = ls[j]
    return bell, back


def _dp_generic(series, gamma, solver, min_seg, max_lookback):
    """Scalar Bellman sweep through the interval cache (any solver mode)."""
    t_max = series.t_max
    cache = IntervalCache()
    bell = np.full(t_max + 1, np.inf)
    bell[0] = 0.0
    back = np.full(t_max + 1, -1, dtype=np.int64)
    for r in range(min_seg, t_max + 1):
        for l in _candidate_starts(r, min_seg, max_lookback):
            l = int(l)
            if not np.isfinite(bell[l]):
                continue
            cost = bell[l] + gamma + interval_objective(series, (l + 1, r), solver, cache)
            if cost < bell[r]:
                bell[r] = cost
                back[r] = l
    return bell, back


def dp_objective(
    series: ObservationSeries,
    segmentation: Segmentation,
    gamma: float,
    solver: SolverConfig | None = None,
    cache: IntervalCache | None = None,
) -> float:
    """Penalized cost of an arbitrary segmentation: likelihood + gamma per interval."""
    solver = solver or SolverConfig()
    if segmentation.t_max != series.t_max:
        raise ValueError("segmentation does not match the series length")
    total = 0.0
    for interval in segmentation.intervals():
        total += interval_objective(series, interval, solver, cache)
    return total + gamma * (segmentation.k + 1)

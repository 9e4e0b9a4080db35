"""Wild binary segmentation with pluggable split statistics.

Random sub-intervals are drawn once; the recursion restricts each to the
current segment, takes the best split of the chosen statistic across all
sub-intervals, and accepts it when the statistic clears the threshold.
Three statistics are provided: a generalized likelihood ratio, a two-sample
pairwise-count statistic valid for general stochastically transitive models,
and a Borda-count CUSUM.

Throughout, a split ``t`` of the segment ``{s..e}`` denotes the first time
index of the right part: the two sides are ``{s..t-1}`` and ``{t..e}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import Segmentation
from .model import ObservationSeries, _check_interval
from .solver import (
    IntervalCache,
    PrefixCounts,
    SolverConfig,
    interval_objective,
    pair_counts,
    ridge_fit_batch,
)


@dataclass(frozen=True)
class WbsConfig:
    """Settings for wild binary segmentation."""

    intervals_m: int = 50
    threshold_gamma: float = 1.0
    statistic: str = "glr"
    rng_seed: int = 0
    min_gap: int = 2

    def __post_init__(self):
        if self.intervals_m < 1:
            raise ValueError("intervals_m must be at least 1")
        if self.threshold_gamma < 0:
            raise ValueError("threshold_gamma must be nonnegative")
        if self.statistic not in ("glr", "sst", "borda"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.min_gap < 1:
            raise ValueError("min_gap must be at least 1")


@dataclass(frozen=True)
class IntervalStat:
    """Best split found within one evaluated interval."""

    value: float
    split: int


def glr_stat(
    series: ObservationSeries,
    s: int,
    e: int,
    t: int,
    solver: SolverConfig | None = None,
    cache: IntervalCache | None = None,
) -> float:
    """Generalized likelihood ratio for a split of ``{s..e}`` at ``t``.

    Joint minimized negative log-likelihood minus the sum of the two
    one-sided fits; nonnegative up to solver tolerance and clamped at zero.
    """
    solver = solver or SolverConfig()
    if not (s < t <= e):
        raise ValueError(f"split {t} must satisfy {s} < t <= {e}")
    _check_interval(series, (s, e))
    joint = interval_objective(series, (s, e), solver, cache)
    left = interval_objective(series, (s, t - 1), solver, cache)
    right = interval_objective(series, (t, e), solver, cache)
    return max(0.0, joint - left - right)


def _sst_from_counts(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Two-sample statistic from stacked ordered win-count matrices.

    Sums the display over all ordered pairs; pairs compared at most once on
    either side are masked out by the indicator and contribute zero.
    """
    kp = x + x.transpose(0, 2, 1)
    kq = y + y.transpose(0, 2, 1)
    valid = (kp > 1) & (kq > 1)
    num = (
        kq * (kq - 1.0) * (x * x - x)
        + kp * (kp - 1.0) * (y * y - y)
        - 2.0 * (kp - 1.0) * (kq - 1.0) * x * y
    )
    den = (kp - 1.0) * (kq - 1.0) * (kp + kq)
    den = np.where(valid, den, 1.0)
    terms = np.where(valid, num / den, 0.0)
    return terms.sum(axis=(1, 2))


def sst_stat(series: ObservationSeries, left_interval, right_interval) -> float:
    """Two-sample pairwise-count statistic between two disjoint intervals."""
    ls, le = _check_interval(series, left_interval)
    rs, re = _check_interval(series, right_interval)
    if not (le < rs or re < ls):
        raise ValueError("intervals must be disjoint")
    x = pair_counts(series, (ls, le))
    y = pair_counts(series, (rs, re))
    return float(_sst_from_counts(x[None], y[None])[0])


def borda_vector(series: ObservationSeries, interval) -> np.ndarray:
    """Normalized win-minus-loss tally per item over the interval.

    Components always sum to zero because every comparison contributes one
    win and one loss.
    """
    start, end = _check_interval(series, interval)
    w, l = series.slice_arrays(start, end)
    n = series.n
    wins = np.bincount(w, minlength=n).astype(float)
    losses = np.bincount(l, minlength=n).astype(float)
    return (wins - losses) / (end - start + 1)


def borda_cusum(series: ObservationSeries, s: int, e: int, t: int) -> float:
    """CUSUM of the Borda vectors of the two sides of a split at ``t``."""
    if not (s < t <= e):
        raise ValueError(f"split {t} must satisfy {s} < t <= {e}")
    beta_left = borda_vector(series, (s, t - 1))
    beta_right = borda_vector(series, (t, e))
    len_l = t - s
    len_r = e - t + 1
    weight = len_l * len_r / (len_l + len_r)
    return float(weight * np.sum((beta_left - beta_right) ** 2))


class _ScanContext:
    """Per-run prefix structures shared by all interval scans."""

    def __init__(self, series: ObservationSeries, config: WbsConfig, solver: SolverConfig):
        self.series = series
        self.config = config
        self.solver = solver
        self.cache = IntervalCache()
        self.pair_prefix: PrefixCounts | None = None
        self.win_prefix: np.ndarray | None = None
        self.lose_prefix: np.ndarray | None = None
        stat = config.statistic
        if stat == "sst" or (stat == "glr" and solver.mode == "ridge"):
            self.pair_prefix = PrefixCounts(series)
        if stat == "borda":
            n = series.n
            t_max = series.t_max
            win = np.zeros((t_max + 1, n))
            lose = np.zeros((t_max + 1, n))
            onehot_w = np.zeros((t_max, n))
            onehot_w[np.arange(t_max), series.winners] = 1.0
            onehot_l = np.zeros((t_max, n))
            onehot_l[np.arange(t_max), series.losers] = 1.0
            np.cumsum(onehot_w, axis=0, out=win[1:])
            np.cumsum(onehot_l, axis=0, out=lose[1:])
            self.win_prefix = win
            self.lose_prefix = lose

    def scan(self, s: int, e: int) -> IntervalStat:
        """Best split of segment {s..e} under the configured statistic."""
        cands = np.arange(s + 1, e, dtype=np.int64)
        stat = self.config.statistic
        if stat == "glr":
            values = self._scan_glr(s, e, cands)
        elif stat == "sst":
            values = self._scan_sst(s, e, cands)
        else:
            values = self._scan_borda(s, e, cands)
        j = int(np.argmax(values))
        return IntervalStat(value=float(values[j]), split=int(cands[j]))

    def _scan_glr(self, s, e, cands):
        if self.solver.mode != "ridge":
            return np.array(
                [glr_stat(self.series, s, e, int(t), self.solver, self.cache) for t in cands]
            )
        prefix = self.pair_prefix
        solver = self.solver
        joint_theta, joint_nll, _, _ = ridge_fit_batch(
            prefix.window(s, e),
            lam=solver.ridge_lambda,
            grad_tol=solver.grad_tol,
            max_iter=solver.max_iter,
        )
        warm = np.broadcast_to(joint_theta[0], (len(cands), prefix.n))
        _, left_nll, _, _ = ridge_fit_batch(
            prefix.windows_fixed_start(s, cands - 1), warm,
            lam=solver.ridge_lambda, grad_tol=solver.grad_tol, max_iter=solver.max_iter,
        )
        _, right_nll, _, _ = ridge_fit_batch(
            prefix.windows_fixed_end(cands, e), warm,
            lam=solver.ridge_lambda, grad_tol=solver.grad_tol, max_iter=solver.max_iter,
        )
        return np.maximum(0.0, joint_nll[0] - left_nll - right_nll)

    def _scan_sst(self, s, e, cands):
        prefix = self.pair_prefix
        values = np.empty(len(cands))
        for lo in range(0, len(cands), 256):
            chunk = cands[lo : lo + 256]
            x = prefix.windows_fixed_start(s, chunk - 1)
            y = prefix.windows_fixed_end(chunk, e)
            values[lo : lo + len(chunk)] = _sst_from_counts(x, y)
        return values

    def _scan_borda(self, s, e, cands):
        win, lose = self.win_prefix, self.lose_prefix
        len_l = (cands - s).astype(float)
        len_r = (e - cands + 1).astype(float)
        beta_left = ((win[cands - 1] - win[s - 1]) - (lose[cands - 1] - lose[s - 1])) / len_l[:, None]
        beta_right = ((win[e] - win[cands - 1]) - (lose[e] - lose[cands - 1])) / len_r[:, None]
        weight = len_l * len_r / (len_l + len_r)
        return weight * np.sum((beta_left - beta_right) ** 2, axis=1)


def sample_intervals(t_max: int, config: WbsConfig, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Draw the random sub-intervals, resampling until each is wide enough."""
    width = max(2 * config.min_gap, 2)
    out = []
    for _ in range(config.intervals_m):
        while True:
            a = int(rng.integers(1, t_max + 1))
            b = int(rng.integers(1, t_max + 1))
            alpha, beta = min(a, b), max(a, b)
            if beta - alpha >= width:
                out.append((alpha, beta))
                break
    return out


def wbs_detect(
    series: ObservationSeries,
    config: WbsConfig,
    solver: SolverConfig | None = None,
) -> Segmentation:
    """Recursive wild-binary-segmentation detection.

    Returns the accepted splits as a sorted segmentation; empty when no
    statistic exceeds the threshold.
    """
    solver = solver or SolverConfig()
    t_max = series.t_max
    rng = np.random.default_rng(config.rng_seed)
    intervals = sample_intervals(t_max, config, rng)
    ctx = _ScanContext(series, config, solver)
    found: list[int] = []
    stack = [(1, t_max)]
    while stack:
        s, e = stack.pop()
        if e - s + 1 < config.min_gap:
            continue
        best_value = -1.0
        best_split = -1
        for alpha, beta in intervals:
            sm, em = max(s, alpha), min(e, beta)
            if em - sm <= 1:
                continue
            stat = ctx.scan(sm, em)
            if stat.value > best_value:
                best_value = stat.value
                best_split = stat.split
        if best_split >= 0 and best_value > config.threshold_gamma:
            found.append(best_split)
            stack.append((best_split, e))
            stack.append((s, best_split - 1))
    return Segmentation(change_points=tuple(sorted(found)), t_max=t_max)

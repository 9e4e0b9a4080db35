"""Interval maximum-likelihood fitting for the pairwise comparison model.

The likelihood of an interval depends on the data only through the ordered
pairwise win counts, so fits are computed from an ``n x n`` count matrix
regardless of interval length.  Two modes are provided:

* ``ridge`` (default): unconstrained Newton minimization of the likelihood
  plus an l2 penalty, then projected back to the zero-sum box.  This mirrors
  the practical penalized-logistic-regression fit and is the mode used by
  the detectors.
* ``constrained``: projected Newton minimization over the zero-sum box
  itself, used for theory-faithful statistics and oracle tests.

A batched variant of the ridge Newton solver fits many count matrices at
once; the dynamic program and the split-scan statistics are built on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ObservationSeries, Theta, _check_interval, sigmoid

DEFAULT_RIDGE_LAMBDA = 0.1
DEFAULT_BOUND_B = 10.0


@dataclass(frozen=True)
class SolverConfig:
    """Settings for interval fits.

    ``mode`` is ``"ridge"`` or ``"constrained"``.  In ridge mode the box
    bound is effectively inactive at its default of 10; in constrained mode
    ``bound_b`` should be supplied by the caller.
    """

    bound_b: float = DEFAULT_BOUND_B
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA
    max_iter: int = 100
    grad_tol: float = 1e-10
    mode: str = "ridge"

    def __post_init__(self):
        if self.mode not in ("ridge", "constrained"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be nonnegative")
        if self.bound_b <= 0:
            raise ValueError("bound_b must be positive")


@dataclass(frozen=True)
class FitResult:
    """Outcome of one interval fit.

    ``objective`` is the plain negative log-likelihood at ``theta_hat``,
    excluding any ridge term.
    """

    theta_hat: Theta
    objective: float
    converged: bool
    iterations: int


def pair_counts(series: ObservationSeries, interval) -> np.ndarray:
    """Ordered win-count matrix W with W[i, j] = wins of i over j in the interval."""
    start, end = _check_interval(series, interval)
    w, l = series.slice_arrays(start, end)
    n = series.n
    counts = np.bincount(w * n + l, minlength=n * n).astype(np.float64)
    return counts.reshape(n, n)


class PrefixCounts:
    """Cumulative ordered win counts, enabling O(1) interval count lookups.

    ``upto(t)`` returns the count matrix of observations 1..t; interval
    counts follow by subtraction.  Memory is (T+1) * n^2 int32.
    """

    def __init__(self, series: ObservationSeries):
        n = series.n
        t_max = series.t_max
        flat = (series.winners * n + series.losers).astype(np.int64)
        cum = np.zeros((t_max + 1, n * n), dtype=np.int32)
        onehot = np.zeros((t_max, n * n), dtype=np.int32)
        onehot[np.arange(t_max), flat] = 1
        np.cumsum(onehot, axis=0, out=cum[1:])
        self._cum = cum
        self.n = n
        self.t_max = t_max

    def upto(self, t: int) -> np.ndarray:
        return self._cum[t].reshape(self.n, self.n)

    def window(self, start: int, end: int) -> np.ndarray:
        """Counts over the inclusive window {start..end} as float64."""
        diff = self._cum[end] - self._cum[start - 1]
        return diff.astype(np.float64).reshape(self.n, self.n)

    def windows_fixed_end(self, starts: np.ndarray, end: int) -> np.ndarray:
        """Stack of count matrices {start..end} for many starts."""
        diff = self._cum[end][None, :] - self._cum[starts - 1]
        return diff.astype(np.float64).reshape(len(starts), self.n, self.n)

    def windows_fixed_start(self, start: int, ends: np.ndarray) -> np.ndarray:
        """Stack of count matrices {start..end} for many ends."""
        diff = self._cum[ends] - self._cum[start - 1][None, :]
        return diff.astype(np.float64).reshape(len(ends), self.n, self.n)

    def windows_sliding(self, starts: np.ndarray, length: int) -> np.ndarray:
        """Stack of count matrices {start..start+length-1} for many starts."""
        diff = self._cum[starts + length - 1] - self._cum[starts - 1]
        return diff.astype(np.float64).reshape(len(starts), self.n, self.n)


def _objective_batch(counts: np.ndarray, theta: np.ndarray, lam: float) -> np.ndarray:
    """Penalized objective for a stack of count matrices and score vectors.

    Uses ``count * -log(p)``; per-term absolute error is at the float noise
    floor of the sum, and terms below 1e-16 vanish, which is harmless at the
    objective's own resolution.
    """
    z = theta[:, :, None] - theta[:, None, :]
    with np.errstate(over="ignore", divide="ignore"):
        logp = np.log(1.0 / (1.0 + np.exp(-z)))
    nll = -np.einsum("bij,bij->b", counts, logp)
    return nll + 0.5 * lam * np.einsum("bi,bi->b", theta, theta)


def _objective_from_p(counts: np.ndarray, p: np.ndarray, theta: np.ndarray, lam: float) -> np.ndarray:
    """Penalized objective when the win-probability tensor is already in hand."""
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    nll = -np.einsum("bij,bij->b", counts, logp)
    return nll + 0.5 * lam * np.einsum("bi,bi->b", theta, theta)


def nll_from_counts(counts: np.ndarray, theta: np.ndarray) -> float:
    """Plain negative log-likelihood of a single count matrix at ``theta``."""
    z = theta[:, None] - theta[None, :]
    return float(np.sum(counts * np.logaddexp(0.0, -z)))


def _expit(z: np.ndarray) -> np.ndarray:
    """Hot-path logistic; overflow in exp saturates to the correct limit."""
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


TRUST_RADIUS = 0.125


def ridge_fit_batch(
    counts: np.ndarray,
    theta0: np.ndarray | None = None,
    lam: float = DEFAULT_RIDGE_LAMBDA,
    grad_tol: float = 1e-10,
    max_iter: int = 100,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Newton minimization of ``nll + lam/2 ||theta||^2`` for a stack of counts.

    Returns ``(thetas, nlls, converged, iterations)`` where ``nlls`` is the
    plain likelihood part at the solution.

    Convergence is driven by the gradient test: the likelihood part of the
    objective is first-order sensitive to theta, so iteration must continue
    even when the per-step descent falls below float resolution.  Steps with
    sup-norm under a small trust radius are accepted without a line search
    (the Hessian is accurate over that range for this objective); larger
    steps are safeguarded by objective halving.  The objective itself is
    only materialized when a problem retires, reusing the win-probability
    tensor already computed for its gradient.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim == 2:
        counts = counts[None]
    batch, n, _ = counts.shape
    if theta0 is None:
        theta = np.zeros((batch, n))
    else:
        theta = np.array(theta0, dtype=np.float64)
        if theta.ndim == 1:
            theta = np.broadcast_to(theta, (batch, n)).copy()
    obj = np.zeros(batch)
    converged = np.zeros(batch, dtype=bool)
    iterations = np.zeros(batch, dtype=np.int64)
    eye_idx = np.arange(n)
    idx_a = np.arange(batch)
    cnt_a, th_a = counts, theta.copy()
    for _ in range(max_iter):
        z = th_a[:, :, None] - th_a[:, None, :]
        p = _expit(z)
        r_ = cnt_a * (p - 1.0)
        g = r_.sum(axis=2) - r_.sum(axis=1)
        g += lam * th_a
        done = np.max(np.abs(g), axis=1) <= grad_tol
        if np.any(done):
            put = idx_a[done]
            theta[put] = th_a[done]
            obj[put] = _objective_from_p(cnt_a[done], p[done], th_a[done], lam)
            converged[put] = True
            keep = ~done
            idx_a, cnt_a, th_a = idx_a[keep], cnt_a[keep], th_a[keep]
            if idx_a.size == 0:
                break
            g, p = g[keep], p[keep]
        s = cnt_a * (p * (1.0 - p))
        s += s.transpose(0, 2, 1)
        hess = -s
        hess[:, eye_idx, eye_idx] = s.sum(axis=2) + lam
        step = np.linalg.solve(hess, g[:, :, None])[:, :, 0]
        trial = th_a - step
        big = np.max(np.abs(step), axis=1) > TRUST_RADIUS
        stuck = np.zeros(idx_a.size, dtype=bool)
        if np.any(big):
            cur = _objective_from_p(cnt_a[big], p[big], th_a[big], lam)
            tiny = 2e-14 * np.maximum(1.0, np.abs(cur))
            sub_trial = trial[big]
            sub_th = th_a[big]
            sub_step = step[big]
            alpha = np.ones(sub_trial.shape[0])
            new_obj = _objective_batch(cnt_a[big], sub_trial, lam)
            for _ in range(40):
                bad = new_obj > cur + tiny
                if not np.any(bad):
                    break
                alpha[bad] *= 0.5
                sub_trial[bad] = sub_th[bad] - alpha[bad, None] * sub_step[bad]
                new_obj[bad] = _objective_batch(cnt_a[big][bad], sub_trial[bad], lam)
            still_bad = new_obj > cur + tiny
            sub_trial[still_bad] = sub_th[still_bad]
            trial[big] = sub_trial
            stuck[big] = still_bad
        moved = np.max(np.abs(trial - th_a), axis=1)
        stalled = stuck | (moved <= 1e-13 * (1.0 + np.max(np.abs(th_a), axis=1)))
        iterations[idx_a] += 1
        if np.any(stalled):
            # theta no longer changes at float resolution; the retirement
            # objective uses this iteration's p, off by at most grad * move
            put = idx_a[stalled]
            theta[put] = trial[stalled]
            obj[put] = _objective_from_p(cnt_a[stalled], p[stalled], th_a[stalled], lam)
            converged[put] = True
            keep = ~stalled
            idx_a, cnt_a, th_a = idx_a[keep], cnt_a[keep], trial[keep]
            if idx_a.size == 0:
                break
        else:
            th_a = trial
    if idx_a.size:
        theta[idx_a] = th_a
        obj[idx_a] = _objective_batch(cnt_a, th_a, lam)
    nll = obj - 0.5 * lam * np.einsum("bi,bi->b", theta, theta)
    return theta, nll, converged, iterations


def project_zero_sum_box(v: np.ndarray, bound_b: float) -> np.ndarray:
    """Euclidean projection onto {sum(x) = 0, |x_i| <= B}.

    The projection is ``clip(v - mu, -B, B)`` where the shift ``mu`` solves
    ``sum(clip(v - mu)) = 0``; the sum is monotone in ``mu`` so bisection
    converges.
    """
    v = np.asarray(v, dtype=float)
    lo = float(v.min()) - bound_b
    hi = float(v.max()) + bound_b
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = float(np.clip(v - mid, -bound_b, bound_b).sum())
        if s > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    out = np.clip(v - 0.5 * (lo + hi), -bound_b, bound_b)
    return out - out.sum() / out.size if abs(out.sum()) > 0 else out


def _constrained_fit(
    counts: np.ndarray, config: SolverConfig, theta0: np.ndarray | None
) -> tuple[np.ndarray, float, bool, int]:
    """Projected Newton minimization of the likelihood over the zero-sum box."""
    n = counts.shape[0]
    bound = config.bound_b
    theta = project_zero_sum_box(np.zeros(n) if theta0 is None else theta0, bound)
    idx = np.arange(n)

    def objective(th):
        return nll_from_counts(counts, th)

    def gradient(th):
        z = th[:, None] - th[None, :]
        r = counts * (sigmoid(z) - 1.0)
        return r.sum(axis=1) - r.sum(axis=0)

    obj = objective(theta)
    iterations = 0
    converged = False
    for iterations in range(1, config.max_iter + 1):
        g = gradient(theta)
        pg = theta - project_zero_sum_box(theta - g, bound)
        if float(np.linalg.norm(pg)) <= config.grad_tol:
            converged = True
            break
        z = theta[:, None] - theta[None, :]
        p = sigmoid(z)
        s = counts * p * (1.0 - p)
        s = s + s.T
        hess = -s
        hess[idx, idx] += s.sum(axis=1)
        # regularize the all-ones kernel and any flat directions
        scale = max(float(np.trace(hess)) / n, 1e-8)
        hess[idx, idx] += 1e-10 * scale
        hess += (scale / n) * np.ones((n, n)) / n
        try:
            direction = -np.linalg.solve(hess, g)
        except np.linalg.LinAlgError:
            direction = -g
        direction -= direction.mean()
        improved = False
        for direc in (direction, -g + np.mean(g)):
            alpha = 1.0
            for _ in range(50):
                cand = project_zero_sum_box(theta + alpha * direc, bound)
                cand_obj = objective(cand)
                if cand_obj < obj - 1e-15:
                    theta, obj = cand, cand_obj
                    improved = True
                    break
                alpha *= 0.5
            if improved:
                break
        if not improved:
            # no descent direction makes progress: at the constrained optimum
            converged = True
            break
    return theta, obj, converged, iterations


class IntervalCache:
    """Memo of interval fits keyed by ``(start, end)`` within one detector run.

    Also supplies warm starts: a fit of ``(s, e)`` starts from the cached
    fit of the longest interval sharing the left endpoint ``s``.
    Last-writer-wins semantics; values are deterministic so races are benign.
    """

    def __init__(self):
        self.fits: dict[tuple[int, int], FitResult] = {}
        self._longest: dict[int, int] = {}

    def get(self, start: int, end: int) -> FitResult | None:
        return self.fits.get((start, end))

    def put(self, start: int, end: int, fit: FitResult) -> None:
        self.fits[(start, end)] = fit
        if end > self._longest.get(start, -1):
            self._longest[start] = end

    def warm_start(self, start: int) -> np.ndarray | None:
        end = self._longest.get(start)
        if end is None:
            return None
        return self.fits[(start, end)].theta_hat.scores


def fit_interval(
    series: ObservationSeries,
    interval,
    config: SolverConfig,
    cache: IntervalCache | None = None,
) -> FitResult:
    """Maximum-likelihood fit of the model over an inclusive time interval."""
    start, end = _check_interval(series, interval)
    if cache is not None:
        hit = cache.get(start, end)
        if hit is not None:
            return hit
    counts = pair_counts(series, (start, end))
    warm = cache.warm_start(start) if cache is not None else None
    if config.mode == "ridge":
        thetas, _, conv, iters = ridge_fit_batch(
            counts[None],
            None if warm is None else warm[None],
            lam=config.ridge_lambda,
            grad_tol=config.grad_tol,
            max_iter=config.max_iter,
        )
        theta = _finalize_ridge(thetas[0], config.bound_b)
        objective = nll_from_counts(counts, theta)
        result = FitResult(
            theta_hat=Theta(theta, config.bound_b),
            objective=objective,
            converged=bool(conv[0]),
            iterations=int(iters[0]),
        )
    else:
        theta, objective, converged, iterations = _constrained_fit(counts, config, warm)
        result = FitResult(
            theta_hat=Theta(theta, config.bound_b),
            objective=objective,
            converged=converged,
            iterations=iterations,
        )
    if not np.isfinite(result.objective):
        raise ArithmeticError("interval fit produced a non-finite objective")
    if cache is not None:
        cache.put(start, end, result)
    return result


def _finalize_ridge(theta: np.ndarray, bound_b: float) -> np.ndarray:
    """Re-center, clip to the box and re-center once.

    If the single re-centering pushes a coordinate back outside the box
    (possible when clipping is strongly active), fall back to the exact
    projection so the result always satisfies the parameter-space invariants.
    """
    theta = theta - theta.mean()
    clipped = np.clip(theta, -bound_b, bound_b)
    out = clipped - clipped.mean()
    if float(np.max(np.abs(out))) > bound_b:
        out = project_zero_sum_box(theta, bound_b)
    return out


def interval_objective(
    series: ObservationSeries,
    interval,
    config: SolverConfig,
    cache: IntervalCache | None = None,
) -> float:
    """Minimized interval negative log-likelihood (memoizable scalar)."""
    return fit_interval(series, interval, config, cache).objective

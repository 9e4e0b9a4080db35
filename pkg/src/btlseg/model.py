"""Bradley-Terry-Luce model primitives.

Item `i` beats item `j` with probability ``sigmoid(theta[i] - theta[j])``,
where the score vector ``theta`` is zero-sum and bounded in sup-norm by a
dynamic range ``B``.  This module holds the parameter and data containers,
the negative log-likelihood with its analytic derivatives, winning
probability matrices, and graph-spectral quantities used by the detectors.

Conventions used throughout the package:

* item indices are 0-based,
* time indices are 1-based (the first observation has ``time == 1``),
* an interval ``(start, end)`` denotes the inclusive time window
  ``{start, ..., end}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_SUM_TOL = 1e-8
BOX_TOL = 1e-8


class DisconnectedGraphError(ValueError):
    """Raised when a comparison graph is not connected."""


def sigmoid(x):
    """Stable logistic function 1 / (1 + exp(-x)).

    Accepts scalars or arrays; never overflows for finite input because the
    exponential is only ever evaluated at non-positive arguments.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    if scalar:
        return float(out[0])
    return out.reshape(np.shape(x))


def p_lb(bound_b: float) -> float:
    """Smallest possible pairwise win probability under dynamic range B.

    Equals exp(-2B) / (1 + exp(-2B)); 0.5 at B = 0 and decreasing in B.
    """
    if bound_b < 0:
        raise ValueError(f"bound_b must be nonnegative, got {bound_b}")
    return float(sigmoid(-2.0 * bound_b))


@dataclass(frozen=True)
class Theta:
    """Preference score vector constrained to the zero-sum box.

    ``scores`` sums to zero (identifiability) and satisfies
    ``max(|scores|) <= bound_b``, both up to a small tolerance.
    """

    scores: np.ndarray
    bound_b: float

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        if scores.ndim != 1 or scores.size < 2:
            raise ValueError("scores must be a vector of length >= 2")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        if self.bound_b <= 0:
            raise ValueError(f"bound_b must be positive, got {self.bound_b}")
        if abs(float(scores.sum())) > ZERO_SUM_TOL:
            raise ValueError(f"scores must sum to zero, got sum {scores.sum():.3e}")
        if float(np.max(np.abs(scores))) > self.bound_b + BOX_TOL:
            raise ValueError(
                f"max |score| {np.max(np.abs(scores)):.6f} exceeds bound {self.bound_b}"
            )
        scores = scores.copy()
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)

    @property
    def n(self) -> int:
        return self.scores.size


@dataclass(frozen=True)
class ComparisonGraph:
    """Fixed undirected graph over ``n`` items defining comparable pairs.

    Edges are unordered 0-based pairs ``(i, j)`` with ``i < j``.  The graph
    must be connected for the scores to be identifiable; construction fails
    otherwise.
    """

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("graph needs at least two items")
        edges = frozenset((min(i, j), max(i, j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop on item {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)
        if not self._connected():
            raise DisconnectedGraphError("comparison graph is not connected")

    @classmethod
    def complete(cls, n: int) -> "ComparisonGraph":
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    def _connected(self) -> bool:
        if not self.edges:
            return False
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        return count == self.n

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges in sorted order (deterministic iteration)."""
        return sorted(self.edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def laplacian(self) -> np.ndarray:
        lap = np.zeros((self.n, self.n))
        for i, j in self.edges:
            lap[i, i] += 1.0
            lap[j, j] += 1.0
            lap[i, j] -= 1.0
            lap[j, i] -= 1.0
        return lap


@dataclass(frozen=True)
class Observation:
    """A single comparison outcome: ``winner`` beat ``loser`` at time ``time``.

    Outcomes are stored in normalized orientation, so there is no separate
    binary label; a raw record with label 0 is ingested by swapping the pair.
    """

    time: int
    winner: int
    loser: int


class ObservationSeries:
    """Time-indexed comparison outcomes over a fixed comparison graph.

    Holds exactly one observation per time index 1..T, stored as parallel
    winner/loser arrays.  Immutable after construction and safe to share
    across workers.
    """

    def __init__(self, graph: ComparisonGraph, winners, losers):
        winners = np.asarray(winners, dtype=np.int64).copy()
        losers = np.asarray(losers, dtype=np.int64).copy()
        if winners.ndim != 1 or winners.shape != losers.shape:
            raise ValueError("winners and losers must be 1-d arrays of equal length")
        if winners.size == 0:
            raise ValueError("series must contain at least one observation")
        if np.any(winners == losers):
            raise ValueError("winner and loser must differ")
        for arr in (winners, losers):
            if np.any(arr < 0) or np.any(arr >= graph.n):
                raise ValueError("item index out of range")
        lo = np.minimum(winners, losers)
        hi = np.maximum(winners, losers)
        edge_ok = np.fromiter(
            ((int(a), int(b)) in graph.edges for a, b in zip(lo, hi)),
            dtype=bool,
            count=winners.size,
        )
        if not np.all(edge_ok):
            t = int(np.nonzero(~edge_ok)[0][0]) + 1
            raise ValueError(f"pair at time {t} is not an edge of the comparison graph")
        winners.flags.writeable = False
        losers.flags.writeable = False
        self.graph = graph
        self.winners = winners
        self.losers = losers

    @classmethod
    def from_records(cls, graph: ComparisonGraph, records) -> "ObservationSeries":
        records = list(records)
        times = [r.time for r in records]
        if times != list(range(1, len(records) + 1)):
            raise ValueError("record times must be exactly 1..T in order")
        return cls(graph, [r.winner for r in records], [r.loser for r in records])

    @property
    def t_max(self) -> int:
        return int(self.winners.size)

    @property
    def n(self) -> int:
        return self.graph.n

    def records(self) -> list[Observation]:
        return [
            Observation(t + 1, int(w), int(l))
            for t, (w, l) in enumerate(zip(self.winners, self.losers))
        ]

    def slice_arrays(self, start: int, end: int) -> tuple[np.ndarray, np.ndarray]:
        """Winner/loser arrays for the inclusive time window {start..end}."""
        if not (1 <= start <= end <= self.t_max):
            raise ValueError(f"invalid interval ({start}, {end}) for T={self.t_max}")
        return self.winners[start - 1 : end], self.losers[start - 1 : end]

    def subseries(self, times) -> "ObservationSeries":
        """New series from the given 1-based times, re-indexed to 1..len."""
        idx = np.asarray(times, dtype=np.int64) - 1
        return ObservationSeries(self.graph, self.winners[idx], self.losers[idx])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ObservationSeries)
            and self.graph == other.graph
            and np.array_equal(self.winners, other.winners)
            and np.array_equal(self.losers, other.losers)
        )


def _check_interval(series: ObservationSeries, interval) -> tuple[int, int]:
    start, end = interval
    if start > end:
        raise ValueError(f"empty interval ({start}, {end})")
    if not (1 <= start and end <= series.t_max):
        raise ValueError(f"interval ({start}, {end}) outside [1, {series.t_max}]")
    return int(start), int(end)


def win_prob(theta: Theta, i: int, j: int) -> float:
    """Probability that item ``i`` beats item ``j``."""
    n = theta.n
    if i == j:
        raise ValueError("items must differ")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"item index out of range for n={n}")
    return float(sigmoid(theta.scores[i] - theta.scores[j]))


def neg_log_lik(theta: Theta, series: ObservationSeries, interval) -> float:
    """Negative log-likelihood of the observations in the interval.

    Each observation with winner w and loser l contributes
    ``log(1 + exp(-(theta[w] - theta[l])))``, which is nonnegative.
    """
    start, end = _check_interval(series, interval)
    w, l = series.slice_arrays(start, end)
    z = theta.scores[w] - theta.scores[l]
    return float(np.logaddexp(0.0, -z).sum())


def grad_neg_log_lik(theta: Theta, series: ObservationSeries, interval) -> np.ndarray:
    """Gradient of the interval negative log-likelihood at ``theta``."""
    start, end = _check_interval(series, interval)
    w, l = series.slice_arrays(start, end)
    n = theta.n
    z = theta.scores[w] - theta.scores[l]
    r = sigmoid(z) - 1.0
    grad = np.bincount(w, weights=r, minlength=n) - np.bincount(l, weights=r, minlength=n)
    return grad


def hess_neg_log_lik(theta: Theta, series: ObservationSeries, interval) -> np.ndarray:
    """Hessian of the interval negative log-likelihood at ``theta``.

    A weighted graph Laplacian: symmetric positive semidefinite with the
    all-ones vector in its kernel.
    """
    start, end = _check_interval(series, interval)
    w, l = series.slice_arrays(start, end)
    n = theta.n
    z = theta.scores[w] - theta.scores[l]
    s = sigmoid(z)
    wt = s * (1.0 - s)
    hess = np.zeros((n, n))
    np.add.at(hess, (w, w), wt)
    np.add.at(hess, (l, l), wt)
    np.add.at(hess, (w, l), -wt)
    np.add.at(hess, (l, w), -wt)
    return hess


@dataclass(frozen=True)
class ProbMatrix:
    """Winning probability matrix with P[i, j] = P(i beats j).

    Off-diagonal entries satisfy P[i, j] + P[j, i] = 1; the diagonal is 0.5
    by convention.
    """

    entries: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("entries must be a square matrix")
        if np.any(p <= 0) or np.any(p >= 1):
            raise ValueError("probabilities must lie strictly in (0, 1)")
        if not np.allclose(p + p.T, 1.0, atol=1e-12):
            raise ValueError("P + P^T must equal 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "entries", p)


def prob_matrix(theta: Theta) -> ProbMatrix:
    """Winning probability matrix induced by a score vector."""
    z = theta.scores[:, None] - theta.scores[None, :]
    return ProbMatrix(sigmoid(z))


def prob_matrix_bounds_check(theta1: Theta, theta2: Theta) -> tuple[float, float, float]:
    """Two-sided bound linking score distance to probability-matrix distance.

    Returns ``(lhs, mid, rhs)`` with
    ``lhs = n * p_lb(B)^2 / 16 * ||t1 - t2||^2``,
    ``mid = sum over pairs i < j of (P_ij(t1) - P_ij(t2))^2`` and
    ``rhs = n / 16 * ||t1 - t2||^2``; the sandwich lhs <= mid <= rhs holds
    for any two vectors in the same zero-sum box.

    The middle distance counts each pair once: the underlying identity
    ``sum_{i<j} (d_i - d_j)^2 = n ||d||^2`` for zero-sum ``d`` is what makes
    the outer bounds tight (counting both orientations doubles the middle
    and breaks the upper bound).
    """
    if theta1.n != theta2.n:
        raise ValueError("score vectors must have the same length")
    if theta1.bound_b != theta2.bound_b:
        raise ValueError("score vectors must share the same dynamic range")
    n = theta1.n
    diff_sq = float(np.sum((theta1.scores - theta2.scores) ** 2))
    plb = p_lb(theta1.bound_b)
    lhs = n * plb**2 / 16.0 * diff_sq
    dp = prob_matrix(theta1).entries - prob_matrix(theta2).entries
    iu = np.triu_indices(n, k=1)
    mid = float(np.sum(dp[iu] ** 2))
    rhs = n / 16.0 * diff_sq
    return lhs, mid, rhs


def laplacian_spectrum(graph: ComparisonGraph) -> tuple[float, float, int, int]:
    """Spectral summary ``(lambda2, lambda_n, d_max, edge_count)`` of D - A.

    ``lambda2`` is the algebraic connectivity; a value indistinguishable
    from zero means the graph is disconnected and raises.
    """
    eigs = np.linalg.eigvalsh(graph.laplacian())
    lambda2 = float(eigs[1])
    lambda_n = float(eigs[-1])
    if lambda2 < 1e-10:
        raise DisconnectedGraphError("algebraic connectivity is zero")
    d_max = int(graph.degrees().max())
    return lambda2, lambda_n, d_max, graph.edge_count

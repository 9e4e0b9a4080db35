"""Synthetic pairwise comparison streams with piecewise-constant scores.

At each time step an edge of the comparison graph is drawn uniformly, its
orientation is randomized, and the winner is sampled from the model under
the regime active at that step.  Regimes are separated by evenly spaced
change points; the score vector of each new regime is a permutation of
either the base vector (deterministic change types) or the previous one
(random permutation types).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dp import Segmentation
from .model import ComparisonGraph, ObservationSeries, Theta, laplacian_spectrum, p_lb, sigmoid

CHANGE_KINDS = (
    "type1_reverse",
    "type2_block_reverse",
    "type3_block_exchange",
    "random_perm",
    "partial_random_perm",
)

# deterministic kinds permute the base vector; random kinds act on the
# current vector
_BASE_RELATIVE = ("type1_reverse", "type2_block_reverse", "type3_block_exchange")


@dataclass(frozen=True)
class ChangeSpec:
    """One change point's kind; ``fraction`` applies to partial permutations."""

    kind: str
    fraction: float | None = None

    def __post_init__(self):
        if self.kind not in CHANGE_KINDS:
            raise ValueError(f"unknown change kind {self.kind!r}")
        if self.kind == "partial_random_perm":
            if self.fraction is None or not (0 < self.fraction <= 1):
                raise ValueError("partial_random_perm needs fraction in (0, 1]")
        elif self.fraction is not None:
            raise ValueError(f"{self.kind} takes no fraction")


@dataclass(frozen=True)
class Scenario:
    """Full description of one simulated stream."""

    n: int
    delta_spacing: int
    changes: tuple[ChangeSpec, ...] = ()
    graph: ComparisonGraph | None = None
    max_win_prob: float = 0.9
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "changes", tuple(self.changes))
        if self.delta_spacing < 1:
            raise ValueError("delta_spacing must be at least 1")
        if not (0.5 < self.max_win_prob < 1):
            raise ValueError("max_win_prob must lie in (0.5, 1)")
        if self.graph is None:
            object.__setattr__(self, "graph", ComparisonGraph.complete(self.n))
        elif self.graph.n != self.n:
            raise ValueError("graph size does not match n")

    @property
    def k(self) -> int:
        return len(self.changes)

    @property
    def t_max(self) -> int:
        return (self.k + 1) * self.delta_spacing


def base_theta(n: int, p: float) -> Theta:
    """Arithmetic-progression score vector whose extreme pair wins with probability p.

    The common gap is ``log(p / (1 - p)) / (n - 1)`` and the vector is
    centered to sum to zero.
    """
    if n < 2:
        raise ValueError("need at least two items")
    if not (0.5 < p < 1):
        raise ValueError("p must lie in (0.5, 1)")
    delta = math.log(p / (1 - p)) / (n - 1)
    scores = delta * np.arange(n, dtype=float)
    scores -= scores.mean()
    return Theta(scores, bound_b=float(np.max(np.abs(scores))))


def apply_change(theta: Theta, spec: ChangeSpec, rng: np.random.Generator) -> Theta:
    """Permuted copy of ``theta`` according to the change kind.

    Zero-sum and the box bound are preserved because every kind permutes
    coordinates.  Block kinds require an even item count.
    """
    old = theta.scores
    n = old.size
    if spec.kind == "type1_reverse":
        new = old[::-1].copy()
    elif spec.kind == "type2_block_reverse":
        half = n // 2
        new = np.concatenate([old[:half][::-1], old[half:][::-1]])
    elif spec.kind == "type3_block_exchange":
        if n % 2 != 0:
            raise ValueError("block exchange requires an even number of items")
        half = n // 2
        new = np.concatenate([old[half:], old[:half]])
    elif spec.kind == "random_perm":
        new = old
        for _ in range(1000):
            cand = old[rng.permutation(n)]
            if not np.array_equal(cand, old):
                new = cand
                break
        else:
            raise RuntimeError("could not sample a non-identity permutation")
    else:  # partial_random_perm
        size = int(round(spec.fraction * n))
        if size < 2:
            raise ValueError("partial permutation needs at least two selected items")
        subset = np.sort(rng.choice(n, size=size, replace=False))
        for _ in range(1000):
            perm = rng.permutation(size)
            if not np.any(perm == np.arange(size)):
                break
        else:
            raise RuntimeError("could not sample a derangement")
        new = old.copy()
        new[subset] = old[subset[perm]]
    return Theta(new, bound_b=theta.bound_b)


def regime_thetas(scenario: Scenario, rng: np.random.Generator) -> list[Theta]:
    """Score vector of each regime, in order."""
    base = base_theta(scenario.n, scenario.max_win_prob)
    thetas = [base]
    current = base
    for spec in scenario.changes:
        source = base if spec.kind in _BASE_RELATIVE else current
        current = apply_change(source, spec, rng)
        thetas.append(current)
    return thetas


def generate(scenario: Scenario) -> tuple[ObservationSeries, Segmentation, list[Theta]]:
    """Sample a full observation stream.

    Returns the series, the true change points (each the first index of its
    new regime, i.e. ``k * delta + 1``), and the regime score vectors.
    """
    seq = np.random.SeedSequence(scenario.rng_seed)
    perm_rng, edge_rng, orient_rng, outcome_rng = (
        np.random.default_rng(s) for s in seq.spawn(4)
    )
    thetas = regime_thetas(scenario, perm_rng)
    graph = scenario.graph
    t_max = scenario.t_max
    delta = scenario.delta_spacing
    edges = np.asarray(graph.edge_list(), dtype=np.int64)
    eidx = edge_rng.integers(0, len(edges), size=t_max)
    first = edges[eidx, 0]
    second = edges[eidx, 1]
    flip = orient_rng.random(t_max) < 0.5
    a = np.where(flip, second, first)
    b = np.where(flip, first, second)
    score_rows = np.stack([th.scores for th in thetas])
    regime = np.arange(t_max) // delta
    z = score_rows[regime, a] - score_rows[regime, b]
    a_wins = outcome_rng.random(t_max) < sigmoid(z)
    winners = np.where(a_wins, a, b)
    losers = np.where(a_wins, b, a)
    series = ObservationSeries(graph, winners, losers)
    truth = Segmentation(
        change_points=tuple(k * delta + 1 for k in range(1, scenario.k + 1)),
        t_max=t_max,
    )
    return series, truth, thetas


@dataclass(frozen=True)
class SnrReport:
    """Informational signal-to-noise summary; never enforced.

    ``rhs_factor`` collects the difficulty terms
    ``p_lb^-4 * K * |E| * n * d_max / lambda2^2 * log(T n)``;
    ``implied_scale`` is ``delta * kappa^2 / rhs_factor``, the headroom the
    stream has over that factor.
    """

    delta: int
    t_max: int
    kappa: float | None
    rhs_factor: float
    implied_scale: float | None
    lambda2: float = field(repr=False, default=0.0)
    d_max: int = field(repr=False, default=0)
    edge_count: int = field(repr=False, default=0)


def snr_diagnostic(scenario: Scenario, bound_b: float) -> SnrReport:
    """Compute the diagnostic spacing/jump/graph summary for a scenario."""
    seq = np.random.SeedSequence(scenario.rng_seed)
    perm_rng = np.random.default_rng(seq.spawn(1)[0])
    thetas = regime_thetas(scenario, perm_rng)
    lambda2, _, d_max, edge_count = laplacian_spectrum(scenario.graph)
    n = scenario.n
    t_max = scenario.t_max
    k = scenario.k
    if k == 0:
        return SnrReport(
            delta=scenario.delta_spacing,
            t_max=t_max,
            kappa=None,
            rhs_factor=0.0,
            implied_scale=None,
            lambda2=lambda2,
            d_max=d_max,
            edge_count=edge_count,
        )
    kappa = min(
        float(np.linalg.norm(thetas[i + 1].scores - thetas[i].scores)) for i in range(k)
    )
    rhs_factor = (
        p_lb(bound_b) ** -4 * k * edge_count * n * d_max / lambda2**2 * math.log(t_max * n)
    )
    implied = scenario.delta_spacing * kappa**2 / rhs_factor
    return SnrReport(
        delta=scenario.delta_spacing,
        t_max=t_max,
        kappa=kappa,
        rhs_factor=rhs_factor,
        implied_scale=implied,
        lambda2=lambda2,
        d_max=d_max,
        edge_count=edge_count,
    )

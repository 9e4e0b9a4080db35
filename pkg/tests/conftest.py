import numpy as np
import pytest

from btlseg import ComparisonGraph, ObservationSeries, Theta


def random_series(rng, n=4, t_max=30, graph=None, theta=None):
    """Series with uniform random edges and model-driven outcomes."""
    graph = graph or ComparisonGraph.complete(n)
    edges = np.asarray(graph.edge_list())
    idx = rng.integers(0, len(edges), size=t_max)
    a = edges[idx, 0]
    b = edges[idx, 1]
    flip = rng.random(t_max) < 0.5
    a, b = np.where(flip, b, a), np.where(flip, a, b)
    if theta is None:
        z = np.zeros(t_max)
    else:
        z = theta.scores[a] - theta.scores[b]
    a_wins = rng.random(t_max) < 1.0 / (1.0 + np.exp(-z))
    winners = np.where(a_wins, a, b)
    losers = np.where(a_wins, b, a)
    return ObservationSeries(graph, winners, losers)


def random_theta(rng, n, bound_b):
    """Uniform draw from the box, centered and rescaled into the zero-sum box."""
    scores = rng.uniform(-bound_b, bound_b, size=n)
    scores -= scores.mean()
    top = np.max(np.abs(scores))
    if top > bound_b:
        scores *= bound_b / top
    return Theta(scores, bound_b)


def two_regime_series(length_each=20):
    """Deterministic n=2 stream: item 0 wins the first half, item 1 the second."""
    graph = ComparisonGraph.complete(2)
    winners = [0] * length_each + [1] * length_each
    losers = [1] * length_each + [0] * length_each
    return ObservationSeries(graph, winners, losers)


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)

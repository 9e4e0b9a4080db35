"""Per-segment rankings from a match-record CSV, end to end.

Mirrors the real-data workflow: ingest labeled match records, tune the
penalty, split the history at the detected change points, and print a
ranking table per segment.
"""

import tempfile
from pathlib import Path

import numpy as np

import btlseg as b
from btlseg.io import read_observations_csv, write_observations_csv

teams = ["falcons", "otters", "bisons", "herons"]

# Fabricate a season log: the falcons dominate early, then the otters
# take over mid-season.
rng = np.random.default_rng(99)
strong_early = np.array([1.2, -0.4, -0.4, -0.4])
strong_late = np.array([-0.4, 1.2, -0.4, -0.4])
graph = b.ComparisonGraph.complete(4)
edges = np.asarray(graph.edge_list())
rows = []
for t in range(1, 241):
    theta = strong_early if t <= 120 else strong_late
    i, j = edges[rng.integers(0, len(edges))]
    if rng.random() < 0.5:
        i, j = j, i
    p = 1.0 / (1.0 + np.exp(-(theta[i] - theta[j])))
    winner, loser = (i, j) if rng.random() < p else (j, i)
    rows.append((winner, loser))

series = b.ObservationSeries(graph, [w for w, _ in rows], [l for _, l in rows])

with tempfile.TemporaryDirectory() as tmp:
    csv_path = Path(tmp) / "season.csv"
    write_observations_csv(csv_path, series, teams)
    print(f"wrote {series.t_max} match records, e.g.:")
    print("\n".join(csv_path.read_text().splitlines()[:4]))

    series, labels = read_observations_csv(csv_path)

solver = b.SolverConfig(grad_tol=1e-6)
result = b.cv_select(series, [2.0, 6.0, 18.0, 54.0], "dplr", solver)
print(f"\nselected gamma {result.best_gamma}; change points {result.segmentation.change_points}")

for interval in result.segmentation.intervals():
    fit = b.fit_interval(series, interval, solver)
    order = np.argsort(-fit.theta_hat.scores)
    print(f"\nrounds {interval[0]}..{interval[1]}:")
    for rank, idx in enumerate(order, start=1):
        print(f"  {rank}. {labels[idx]:<8} {fit.theta_hat.scores[idx]:+.3f}")

"""Tour of the three split statistics behind wild binary segmentation.

Shows the likelihood-ratio, two-sample count, and tally-CUSUM statistics on
an easy stream, then replays the classic failure case for the tally CUSUM:
two winning-probability matrices whose row sums match, making the
population CUSUM identically zero while the count statistic still sees the
change.
"""

import numpy as np

import btlseg as b

# An easy two-regime stream: item 0 dominates, then item 1 does.
graph = b.ComparisonGraph.complete(2)
series = b.ObservationSeries(graph, [0] * 30 + [1] * 30, [1] * 30 + [0] * 30)
solver = b.SolverConfig()

print("split statistics on a deterministic flip at t=31:")
for t in (16, 26, 31, 36, 46):
    glr = b.glr_stat(series, 1, 60, t, solver)
    sst = b.sst_stat(series, (1, t - 1), (t, 60))
    cusum = b.borda_cusum(series, 1, 60, t)
    print(f"  t={t:2d}  glr={glr:7.2f}  sst={sst:7.2f}  borda={cusum:7.2f}")

cfg = b.WbsConfig(intervals_m=40, threshold_gamma=2.0, statistic="glr", rng_seed=1)
print(f"\nwbs-glr detection: {b.wbs_detect(series, cfg, solver).change_points}")

# Row-sum-matched winning matrices: every item's expected tally is the same
# before and after the change, so the tally CUSUM has nothing to see.
p_mat = np.array([[0.5, 0.6, 0.8], [0.4, 0.5, 0.7], [0.2, 0.3, 0.5]])
q_mat = np.array([[0.5, 0.55, 0.85], [0.45, 0.5, 0.65], [0.15, 0.35, 0.5]])
print("\nrow sums of the matrix difference:", (p_mat - q_mat).sum(axis=1))

rng = np.random.default_rng(8)
graph3 = b.ComparisonGraph.complete(3)
edges = np.asarray(graph3.edge_list())
t_max, eta = 4000, 2001
idx = rng.integers(0, len(edges), size=t_max)
a, c = edges[idx, 0], edges[idx, 1]
flip = rng.random(t_max) < 0.5
a, c = np.where(flip, c, a), np.where(flip, a, c)
probs = np.where(np.arange(t_max) < eta - 1, p_mat[a, c], q_mat[a, c])
a_wins = rng.random(t_max) < probs
stream = b.ObservationSeries(graph3, np.where(a_wins, a, c), np.where(a_wins, c, a))

from btlseg.wbs import _ScanContext

for stat in ("borda", "sst"):
    ctx = _ScanContext(stream, b.WbsConfig(statistic=stat), solver)
    best = ctx.scan(1, t_max)
    print(f"{stat:>6}: peak at t={best.split} (true change at {eta}), value {best.value:.2f}")

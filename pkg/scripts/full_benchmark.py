"""Opt-in full-scale benchmark of DPLR against the WBS family.

Replays the four canonical simulation settings at full size.  Each trial
simulates a stream, tunes every method on a shared grid by odd/even
cross-validation, and reports the Hausdorff error and the change-count
category.  Expect hours of CPU time at the larger settings; start with
--settings i --trials 5 for a taste.

Usage:
    python3 scripts/full_benchmark.py --settings i,ii --trials 20 --out results.csv
"""

import argparse
import time

import numpy as np

import btlseg as b

SETTINGS = {
    "i": dict(n=10, k=3, delta=500, changes=("type1_reverse", "type2_block_reverse", "type3_block_exchange")),
    "ii": dict(n=20, k=3, delta=800, changes=("type1_reverse", "type2_block_reverse", "type3_block_exchange")),
    "iii": dict(n=100, k=2, delta=1000, changes=("type1_reverse", "type2_block_reverse")),
    "iv": dict(n=100, k=3, delta=2000, changes=("type1_reverse", "type2_block_reverse", "type3_block_exchange")),
}

GRID = [8.0, 12.0, 17.0, 24.0, 30.0, 38.0, 55.0, 80.0, 120.0, 200.0]
METHODS = ("dplr", "wbs-glr", "wbs-sst", "wbs-borda")


def run_setting(name, trials, methods, max_lookback, out_rows):
    spec = SETTINGS[name]
    changes = tuple(b.ChangeSpec(kind) for kind in spec["changes"])
    solver = b.SolverConfig(grad_tol=1e-6)
    for trial in range(trials):
        scenario = b.Scenario(
            n=spec["n"], delta_spacing=spec["delta"], changes=changes, rng_seed=trial
        )
        series, truth, _ = b.generate(scenario)
        for method in methods:
            start = time.time()
            result = b.cv_select(
                series,
                GRID,
                method,
                solver,
                wbs_config=b.WbsConfig(intervals_m=50, rng_seed=trial),
                max_lookback=max_lookback,
                n_jobs=2,
            )
            elapsed = time.time() - start
            err = b.hausdorff(result.segmentation, truth)
            category = b.count_k(result.segmentation, truth)
            row = (name, trial, method, err, category, round(elapsed, 1))
            out_rows.append(row)
            print(
                f"setting {name} trial {trial} {method}: H={err} ({category}) "
                f"gamma={result.best_gamma} [{elapsed:.0f}s]",
                flush=True,
            )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--settings", default="i", help="comma list from {i,ii,iii,iv}")
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--methods", default=",".join(METHODS))
    parser.add_argument(
        "--max-lookback",
        type=int,
        default=None,
        help="cap segment length to bound the quadratic sweep on long streams",
    )
    parser.add_argument("--out", default=None, help="optional CSV for the result rows")
    args = parser.parse_args()

    rows = []
    for name in args.settings.split(","):
        name = name.strip().lower()
        if name not in SETTINGS:
            raise SystemExit(f"unknown setting {name!r}")
        run_setting(name, args.trials, args.methods.split(","), args.max_lookback, rows)

    print("\nmedians by setting/method:")
    for name in sorted({r[0] for r in rows}):
        for method in args.methods.split(","):
            errs = [r[3] for r in rows if r[0] == name and r[2] == method]
            finite = [e for e in errs if np.isfinite(e)]
            med = np.median(errs) if finite else float("inf")
            exact = sum(1 for r in rows if r[0] == name and r[2] == method and r[4] == "exact")
            print(f"  {name:>3} {method:<10} median H = {med:<8} exact K: {exact}/{len(errs)}")

    if args.out:
        with open(args.out, "w") as fh:
            fh.write("setting,trial,method,hausdorff,k_category,seconds\n")
            for row in rows:
                fh.write(",".join(str(x) for x in row) + "\n")
        print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()

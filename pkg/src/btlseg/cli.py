"""Command-line surface: simulate, detect, tune, evaluate, fit.

Exit codes: 0 success, 2 malformed input, 3 disconnected comparison graph,
4 solver non-convergence in constrained mode.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io
from .dp import dp_detect
from .evaluate import count_k, cv_select, hausdorff
from .model import DisconnectedGraphError
from .refine import dplr_detect
from .solver import SolverConfig, fit_interval
from .simulate import generate
from .wbs import WbsConfig, wbs_detect

EXIT_OK = 0
EXIT_MALFORMED = 2
EXIT_DISCONNECTED = 3
EXIT_NOT_CONVERGED = 4

DETECT_METHODS = ("dp", "dplr", "wbs-glr", "wbs-sst", "wbs-borda")


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=("ridge", "constrained"), default="ridge")
    parser.add_argument("--bound-b", type=float, default=10.0)
    parser.add_argument("--ridge-lambda", type=float, default=0.1)
    parser.add_argument("--grad-tol", type=float, default=1e-10)
    parser.add_argument("--max-iter", type=int, default=100)


def _solver_from(args) -> SolverConfig:
    return SolverConfig(
        bound_b=args.bound_b,
        ridge_lambda=args.ridge_lambda,
        grad_tol=args.grad_tol,
        max_iter=args.max_iter,
        mode=args.mode,
    )


def _read_series(args):
    graph = None
    items = None
    if getattr(args, "graph", None):
        if args.graph != "complete":
            graph, items = io.read_edge_list(args.graph)
    return io.read_observations_csv(args.input, items=items, graph=graph)


def _cmd_simulate(args) -> int:
    config_text = Path(args.config).read_text()
    scenario, labels = io.parse_config(config_text, base_dir=Path(args.config).parent)
    series, truth, _ = generate(scenario)
    out = Path(args.out)
    io.write_observations_csv(out, series, labels)
    truth_path = out.with_suffix(".truth.json")
    io.write_segmentation_json(truth_path, truth, extra={"items": labels})
    print(f"wrote {series.t_max} observations to {out}")
    print(f"wrote truth ({truth.k} change points) to {truth_path}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    series, labels = _read_series(args)
    solver = _solver_from(args)
    if args.method == "dp":
        seg, _ = dp_detect(
            series, args.gamma, solver,
            min_seg=args.min_seg, max_lookback=args.max_lookback,
        )
    elif args.method == "dplr":
        seg = dplr_detect(
            series, args.gamma, solver,
            min_seg=args.min_seg, max_lookback=args.max_lookback,
        )
    else:
        cfg = WbsConfig(
            intervals_m=args.wbs_m,
            threshold_gamma=args.gamma,
            statistic=args.method[4:],
            rng_seed=args.seed,
            min_gap=args.min_gap,
        )
        seg = wbs_detect(series, cfg, solver)
    io.write_segmentation_json(args.out, seg, extra={"items": labels})
    print(f"change_points = {list(seg.change_points)}")
    return EXIT_OK


def _cmd_tune(args) -> int:
    series, labels = _read_series(args)
    solver = _solver_from(args)
    grid = [float(g) for g in args.gamma_grid.split(",") if g.strip()]
    if not grid:
        raise io.MalformedInputError("empty gamma grid")
    wbs_config = WbsConfig(
        intervals_m=args.wbs_m, statistic="glr", rng_seed=args.seed, min_gap=args.min_gap
    )
    result = cv_select(
        series, grid, args.method, solver,
        wbs_config=wbs_config, min_seg=args.min_seg,
        max_lookback=args.max_lookback, n_jobs=args.threads,
    )
    lines = ["gamma,k_hat,test_loss"]
    for gamma, k_hat, loss in result.table:
        lines.append(f"{gamma!r},{k_hat},{loss!r}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"best_gamma = {result.best_gamma!r}")
    print(f"change_points = {list(result.segmentation.change_points)}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    est = io.read_segmentation_json(args.est)
    truth = io.read_segmentation_json(args.truth)
    dist = hausdorff(est, truth)
    print(f"hausdorff = {dist!r}")
    print(f"k_category = {count_k(est, truth)}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    series, labels = _read_series(args)
    try:
        start_str, end_str = args.interval.split(":")
        interval = (int(start_str), int(end_str))
    except ValueError as exc:
        raise io.MalformedInputError(f"bad interval {args.interval!r}") from exc
    solver = _solver_from(args)
    result = fit_interval(series, interval, solver)
    scores = result.theta_hat.scores
    order = sorted(range(len(labels)), key=lambda i: (-scores[i], labels[i]))
    print(f"interval = {interval[0]}:{interval[1]}  objective = {result.objective!r}")
    for rank, i in enumerate(order, start=1):
        print(f"{rank:3d}  {labels[i]}  {scores[i]:+.6f}")
    if solver.mode == "constrained" and not result.converged:
        print("solver did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btlseg",
        description="Change point localization for pairwise comparison streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic observation stream")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("detect", help="detect change points in an observation CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", choices=DETECT_METHODS, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--wbs-m", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-seg", type=int, default=None)
    p.add_argument("--min-gap", type=int, default=2)
    p.add_argument("--max-lookback", type=int, default=None)
    p.add_argument("--graph", default=None, help="'complete' or an edge-list file")
    _add_solver_args(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("tune", help="cross-validate the penalty over a grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", choices=DETECT_METHODS, required=True)
    p.add_argument("--gamma-grid", required=True, help="comma-separated values")
    p.add_argument("--out", required=True)
    p.add_argument("--wbs-m", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-seg", type=int, default=None)
    p.add_argument("--min-gap", type=int, default=2)
    p.add_argument("--max-lookback", type=int, default=None)
    p.add_argument("--graph", default=None)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    _add_solver_args(p)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("evaluate", help="compare estimated and true change points")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("fit", help="fit scores and print the ranking for an interval")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--interval", required=True, help="inclusive 1-based range 's:e'")
    p.add_argument("--graph", default=None)
    _add_solver_args(p)
    p.set_defaults(func=_cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DisconnectedGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except (io.MalformedInputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())

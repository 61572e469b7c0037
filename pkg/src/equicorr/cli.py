"""Command line entry point: ``equicorr {run,reproduce-tables,risk,threshold}``."""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Sequence

import numpy as np

from . import harness
from .model import ModelParams, determined_threshold, draw_observations, draw_signals, exact_risk
from .thresholds import (
    DEFAULT_EPS,
    DEFAULT_MAX_ITER,
    DEFAULT_POISSON_ALPHA,
    Determined,
    FixedC,
    compute_threshold,
    parse_method,
)

PROG = "equicorr"


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, required=True, help="number of hypotheses")
    sparsity = p.add_mutually_exclusive_group(required=True)
    sparsity.add_argument("--beta", type=float, help="sparsity exponent, p = m**-beta")
    sparsity.add_argument("--p", type=float, help="explicit signal probability")
    p.add_argument("--sigma0-sq", type=float, required=True)
    p.add_argument("--tau-sq", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--delta0", type=float, default=1.0)
    p.add_argument("--deltaA", type=float, default=1.0)


def _params(args: argparse.Namespace) -> ModelParams:
    return ModelParams(
        m=args.m, beta=args.beta, p=args.p, sigma0_sq=args.sigma0_sq, tau_sq=args.tau_sq,
        rho=args.rho, delta0=args.delta0, deltaA=args.deltaA,
    )


def _add_run_args(p: argparse.ArgumentParser, default_reps: int | None) -> None:
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                   help=f"master seed (default: ${harness.SEED_ENV_VAR} or {harness.DEFAULT_SEED})")
    p.add_argument("--reps", type=int, default=default_reps, help="replications per cell")
    p.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the cells of a JSON config and write a CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    _add_run_args(run, None)

    rep = sub.add_parser("reproduce-tables", help="run the built-in table grid")
    rep.add_argument("--out", required=True, help="output directory")
    _add_run_args(rep, 1000)
    rep.add_argument("--grid-points", type=int, default=harness.DEFAULT_GRID_POINTS)

    risk = sub.add_parser("risk", help="exact risk of the fixed rule |y| > C")
    _add_model_args(risk)
    which = risk.add_mutually_exclusive_group()
    which.add_argument("--c", type=float, help="evaluate at this cut")
    which.add_argument("--curve", type=int, metavar="N", help="evaluate N cuts on [0, --c-max]")
    risk.add_argument("--c-max", type=float, default=None, help="curve upper end (default 4 * signal sd)")

    thr = sub.add_parser("threshold", help="print the cut a method produces")
    thr.add_argument("--method", required=True,
                     choices=["T1", "T2", "T3", "power_mean", "algorithm", "determined",
                              "top_fraction", "poisson_k", "fixed"])
    _add_model_args(thr)
    thr.add_argument("--beta-exp", type=float, help="power_mean exponent")
    thr.add_argument("--eps", type=float, default=DEFAULT_EPS)
    thr.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    thr.add_argument("--alpha-frac", type=float)
    thr.add_argument("--alpha", type=float, default=DEFAULT_POISSON_ALPHA)
    thr.add_argument("--c", type=float)
    thr.add_argument("--y", help="comma-separated observations for data-driven methods")
    thr.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                     help="seed for drawing one sample when --y is absent")
    return parser


def _seed(args: argparse.Namespace) -> int:
    return args.seed if args.seed is not None else harness.seed_from_env()


def _cmd_run(args: argparse.Namespace) -> None:
    cells = harness.load_config(args.config)
    if args.reps is not None:
        cells = [harness.ExperimentCell(c.params, c.methods, args.reps, c.oracle_grid_points) for c in cells]
    table = harness.run_grid(cells, _seed(args), args.workers)
    harness.write_csv(table, args.out)


def _cmd_reproduce(args: argparse.Namespace) -> None:
    cells = harness.standard_grid(reps=args.reps, oracle_grid_points=args.grid_points)
    table = harness.run_grid(cells, _seed(args), args.workers)
    for path in harness.write_table_csvs(table, args.out):
        print(path)


def _cmd_risk(args: argparse.Namespace) -> None:
    params = _params(args)
    if args.curve is not None:
        if args.curve < 2:
            raise ValueError("--curve needs at least 2 points")
        c_max = args.c_max if args.c_max is not None else 4.0 * params.sigma1
        cuts = np.linspace(0.0, c_max, args.curve)
    elif args.c is not None:
        cuts = [args.c]
    else:
        cuts = [determined_threshold(params)]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["C", "t11", "t21", "expected_fp", "expected_fn", "risk"])
    for c in cuts:
        r = exact_risk(params, float(c))
        out.writerow([format(float(c), ".6g")] + [format(v, ".6g") for v in
                      (r.t11, r.t21, r.expected_fp, r.expected_fn, r.risk)])


def _method_from_args(args: argparse.Namespace):
    name = args.method
    if name == "power_mean":
        if args.beta_exp is None:
            raise ValueError("--method power_mean needs --beta-exp")
        return parse_method({"method": name, "beta_exp": args.beta_exp})
    if name == "algorithm":
        return parse_method({"method": name, "eps": args.eps, "max_iter": args.max_iter})
    if name == "top_fraction":
        if args.alpha_frac is None:
            raise ValueError("--method top_fraction needs --alpha-frac")
        return parse_method({"method": name, "alpha_frac": args.alpha_frac})
    if name == "poisson_k":
        return parse_method({"method": name, "alpha": args.alpha})
    if name == "fixed":
        if args.c is None:
            raise ValueError("--method fixed needs --c")
        return parse_method({"method": name, "c": args.c})
    return parse_method(name)


def _cmd_threshold(args: argparse.Namespace) -> None:
    params = _params(args)
    method = _method_from_args(args)
    if args.y is not None:
        y = np.array([float(v) for v in args.y.split(",") if v.strip()])
        if y.size == 0:
            raise ValueError("--y holds no values")
    elif isinstance(method, (Determined, FixedC)):
        y = np.zeros(params.m)
    else:
        rng = np.random.default_rng(_seed(args))
        y = draw_observations(params, draw_signals(params, rng), rng).y
    print(format(compute_threshold(method, y, params), ".6g"))


_COMMANDS = {
    "run": _cmd_run,
    "reproduce-tables": _cmd_reproduce,
    "risk": _cmd_risk,
    "threshold": _cmd_threshold,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

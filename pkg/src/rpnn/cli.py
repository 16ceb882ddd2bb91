"""Command line entry point: ``rpnn {fit,eval,sweep,tolsweep,theorem,bench}``.

Exit codes: 0 on success, 1 on a numerical failure, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import harness
from .baselines import legendre_interpolant, spline_interpolant
from .benchmarks import BENCHMARK_IDS, get_benchmark
from .core import NumericalError, RpnnModel, evaluate
from .selection import SelectionStrategy
from .theorem import exact_interpolation_check, mimicry_identity
from .training import fit_rpnn

STRATEGY_CHOICES = ("naive", "agnostic", "informed", "function_agnostic", "function_informed")


def _num(v: float) -> str:
    return f"{v:.17g}"


def _note(**items):
    print(" ".join(f"{k}={v}" for k, v in items.items()), file=sys.stderr)


def _add_function_flags(p, required=True):
    p.add_argument("--function", choices=BENCHMARK_IDS, required=required, default=None if required else "f1",
                   help="target function")
    p.add_argument("--k", type=float, help="frequency/steepness of f1 and f2 (defaults 10 and 1)")
    p.add_argument("--t", type=float, help="time of the Burgers solution f3 (default 1/pi)")
    p.add_argument("--nu", type=float, help="viscosity of f3 (default 0.01/pi)")
    p.add_argument("--eps", type=float, help="distance to the singularity of f4/f5 (default 1/(10 pi))")


def _function(args):
    return get_benchmark(args.function, k=args.k, t=args.t, eps=args.eps, nu=args.nu)


def _function_params(args) -> dict:
    return {k: v for k, v in (("k", args.k), ("t", args.t), ("nu", args.nu), ("eps", args.eps))
            if v is not None}


def _read_points(values, x_file):
    xs = [float(v) for v in values]
    if x_file is not None:
        for line in Path(x_file).read_text().split():
            xs.append(float(line))
    if not xs:
        raise ValueError("no evaluation points given")
    return np.array(xs)


def _fit_baseline(args, fn):
    if args.output:
        raise ValueError("--output stores RPNN models only; drop it when fitting a baseline")
    build = legendre_interpolant if args.baseline == "legendre" else spline_interpolant
    interp = build(fn, args.N, fn.domain)
    _note(seed="none", tolerance="none")
    err = harness.l2_error(fn, interp, fn.domain, args.grid_size)
    print(f"function={fn.label()} baseline={args.baseline} N={args.N}")
    print(f"l2_error={_num(err)}")
    return 0


def cmd_fit(args):
    fn = _function(args)
    if args.baseline:
        return _fit_baseline(args, fn)
    strategy = SelectionStrategy(args.strategy, seed=args.seed, gamma=args.gamma)
    res = fit_rpnn(fn, fn.domain, args.N, strategy, args.solver, args.tol, args.rank_rule)
    _note(seed=args.seed, tolerance=repr(res.tolerance))
    err = harness.l2_error(fn, res.model, fn.domain, args.grid_size)
    if args.output:
        res.model.save(args.output)
    print(f"function={fn.label()} strategy={strategy.kind.short} N={args.N} solver={args.solver} "
          f"rank={res.solution.effective_rank} residual={_num(res.solution.residual_norm)}")
    print(f"l2_error={_num(err)}")
    return 0


def cmd_eval(args):
    model = RpnnModel.load(args.model)
    _note(seed="none", tolerance="none")
    xs = _read_points(args.x, args.x_file)
    outside = ~model.in_domain(xs)
    if np.any(outside):
        print(f"warning: {int(outside.sum())} point(s) outside the training domain {list(model.domain)}",
              file=sys.stderr)
    for x in xs:
        print(_num(evaluate(model, x)))
    return 0


def cmd_bench(args):
    fn = _function(args)
    _note(seed="none", tolerance="none")
    xs = _read_points(args.x, args.x_file)
    for v in np.atleast_1d(fn(xs)):
        print(_num(float(v)))
    return 0


def _write_outputs(records, args):
    out = args.output
    if out:
        harness.emit_csv(records, out)
    else:
        import csv
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(harness.CSV_HEADER)
        for r in records:
            w.writerow(r.row())
    if args.summary:
        harness.emit_summary_csv(harness.summarize(records), args.summary)
    if args.plot:
        harness.emit_plot_script(records, args.plot)


def cmd_sweep(args):
    cfg = harness.SweepConfig.load(args.config)
    if args.output is None and cfg.output:
        args.output = cfg.output
    _note(seed=cfg.master_seed, tolerance="auto" if cfg.tolerance is None else repr(cfg.tolerance))
    records = harness.run_convergence_sweep(cfg, workers=args.workers)
    _write_outputs(records, args)
    return 0


def cmd_tolsweep(args):
    fn = _function(args)
    _note(seed=args.seed, tolerance=",".join(repr(t) for t in args.tols))
    records = harness.run_tolerance_sweep(
        fn, N=args.N, tolerances=args.tols, solvers=args.solvers, trials=args.trials,
        strategy=args.strategy, master_seed=args.seed, cod_rank_rule=args.rank_rule,
        grid_size=args.grid_size, workers=args.workers)
    _write_outputs(records, args)
    return 0


def cmd_theorem(args):
    if args.check == "interp":
        fn = _function(args)
        _note(seed=args.seed, tolerance=repr(float(np.finfo(float).eps)) + " (relative)")
        chk = exact_interpolation_check(args.N, args.strategy, args.seed, fn)
        print(f"N={chk.N} rank={chk.effective_rank} residual_max={_num(chk.residual_max)} "
              f"relative={_num(chk.relative_residual)}")
        return 0
    fn = _function(args)
    _note(seed=args.seed, tolerance="none")
    rep = mimicry_identity(fn, args.n, args.seed, fn.domain)
    print(f"n={rep.n} cond={_num(rep.cond)} coeff_error={_num(rep.coeff_error)}")
    print("weights=" + " ".join(_num(w) for w in rep.solution.weights))
    print(f"offset={_num(rep.solution.offset)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpnn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="train one network and report its L2 error")
    _add_function_flags(p)
    p.add_argument("--strategy", choices=STRATEGY_CHOICES, default="informed")
    p.add_argument("--N", type=int, required=True, help="number of neurons")
    p.add_argument("--solver", choices=("cod", "svd"), default="cod")
    p.add_argument("--rank-rule", choices=("relative", "absolute"), default="relative",
                   help="how COD pivots are compared with the tolerance")
    p.add_argument("--tol", type=float, default=None, help="rank tolerance (default n*ulp(||R||)/1000)")
    p.add_argument("--gamma", type=float, default=1.5, help="slope factor of the informed rule")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-size", type=int, default=10_000, help="points of the L2 test grid")
    p.add_argument("--baseline", choices=harness.BASELINES,
                   help="fit a classical comparator instead (Legendre grid of N+1 points or N spline knots)")
    p.add_argument("--output", "-o", help="where to write the model (JSON)")
    p.set_defaults(run=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("x", nargs="*", help="abscissae")
    p.add_argument("--x-file", help="file of whitespace separated abscissae")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("bench", help="evaluate a benchmark function")
    _add_function_flags(p)
    p.add_argument("x", nargs="*")
    p.add_argument("--x-file")
    p.set_defaults(run=cmd_bench)

    for name, helptext in (("sweep", "Monte-Carlo convergence sweep from a JSON config"),
                           ("tolsweep", "error against rank tolerance at fixed N")):
        p = sub.add_parser(name, help=helptext)
        if name == "sweep":
            p.add_argument("--config", required=True, help="JSON document with SweepConfig fields")
            p.set_defaults(run=cmd_sweep)
        else:
            _add_function_flags(p, required=False)
            p.add_argument("--N", type=int, default=400)
            p.add_argument("--tols", type=float, nargs="+", default=list(harness.DEFAULT_TOLERANCES))
            p.add_argument("--solvers", nargs="+", choices=("svd", "cod"), default=["svd", "cod"])
            p.add_argument("--trials", type=int, default=100)
            p.add_argument("--strategy", choices=STRATEGY_CHOICES, default="informed")
            p.add_argument("--rank-rule", choices=("relative", "absolute"), default="absolute",
                           help="COD pivot rule (the SVD route is always absolute)")
            p.add_argument("--seed", type=int, default=0, help="master seed")
            p.add_argument("--grid-size", type=int, default=10_000)
            p.set_defaults(run=cmd_tolsweep)
        p.add_argument("--output", "-o", help="CSV path (stdout if omitted)")
        p.add_argument("--summary", help="also write per-cell geometric/arithmetic means here")
        p.add_argument("--plot", help="also write a matplotlib script here")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: CPU count, capped by RPNN_THREADS)")

    p = sub.add_parser("theorem", help="exact interpolation and polynomial mimicry checks")
    tsub = p.add_subparsers(dest="check", required=True)
    q = tsub.add_parser("interp", help="interpolate N+1 points with N neurons")
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--strategy", choices=STRATEGY_CHOICES, default="agnostic")
    q.add_argument("--seed", type=int, default=0)
    _add_function_flags(q, required=False)
    q.set_defaults(run=cmd_theorem)
    q = tsub.add_parser("mimic", help="match a degree-n polynomial proxy with n neurons")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--target", dest="function", choices=BENCHMARK_IDS, default="f2")
    q.add_argument("--k", type=float)
    q.add_argument("--t", type=float)
    q.add_argument("--nu", type=float)
    q.add_argument("--eps", type=float)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(run=cmd_theorem)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.run(args)
    except NumericalError as exc:
        print(f"rpnn: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"rpnn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Monte-Carlo convergence sweeps, tolerance studies and their CSV output."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import legendre_interpolant, spline_interpolant
from .benchmarks import BENCHMARK_IDS, BenchmarkFunction, get_benchmark
from .core import NumericalError, _as_interval
from .selection import SelectionStrategy, StrategyKind
from .solvers import cod_solve, default_tolerance, rrqr_decompose, solve, svd, tsvd_solve
from .training import assemble_system

CSV_HEADER = ("function", "strategy", "solver", "N", "trial", "seed", "l2_error",
              "residual_norm", "effective_rank", "wall_time_ms")
DEFAULT_N = (5, 10, 20, 40, 80, 160, 320, 400)
BASELINES = ("legendre", "spline")
DEFAULT_TOLERANCES = (1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-13, 1e-14, 1e-15, 1e-16)


# --------------------------------------------------------------------------
# records and configuration


@dataclass(frozen=True)
class SweepRecord:
    function: str
    strategy: str
    solver: str
    N: int
    trial: int
    seed: int
    l2_error: float
    residual_norm: float
    effective_rank: int
    wall_time_ms: float = 0.0

    def row(self) -> list[str]:
        return [self.function, self.strategy, self.solver, str(self.N), str(self.trial),
                str(self.seed), repr(float(self.l2_error)), repr(float(self.residual_norm)),
                str(self.effective_rank), repr(float(self.wall_time_ms))]

    @classmethod
    def from_row(cls, row) -> "SweepRecord":
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"expected {len(CSV_HEADER)} fields, got {len(row)}: {row!r}")
        f, s, solver, N, trial, seed, l2, res, rank, wall = row
        return cls(f, s, solver, int(N), int(trial), int(seed), float(l2), float(res),
                   int(rank), float(wall))


def solver_label(method, rank_rule, tol) -> str:
    """Compact solver tag such as ``cod/rel/auto`` or ``svd/abs/1e-08``."""
    rule = "abs" if method == "svd" else {"relative": "rel", "absolute": "abs"}[rank_rule]
    return f"{method}/{rule}/{'auto' if tol is None else repr(float(tol))}"


@dataclass(frozen=True)
class SweepConfig:
    """Everything a convergence sweep depends on.

    ``params`` holds the target's parameters (``k``, ``t``, ``nu``, ``eps``).
    ``tolerance=None`` selects ``n ulp(||R||_2) / 1000``.  ``timing`` turns on
    wall-clock measurements; it is off by default so that output files are
    reproducible byte for byte.
    """

    function: str = "f1"
    params: dict = field(default_factory=dict)
    strategies: tuple = ("naive", "function_agnostic", "function_informed")
    N: tuple = DEFAULT_N
    trials: int = 100
    train_factor: int = 5
    grid_size: int = 10_000
    solver: str = "cod"
    rank_rule: str = "relative"
    tolerance: float | None = None
    baselines: tuple = BASELINES
    output: str | None = None
    master_seed: int = 0
    timing: bool = False

    def __post_init__(self):
        if self.function not in BENCHMARK_IDS:
            raise ValueError(f"unknown function {self.function!r}")
        params = dict(self.params)
        unknown = set(params) - {"k", "t", "nu", "eps"}
        if unknown:
            raise ValueError(f"unknown function parameters {sorted(unknown)}")
        object.__setattr__(self, "params", params)
        strategies = tuple(StrategyKind.parse(s).value for s in self.strategies)
        object.__setattr__(self, "strategies", strategies)
        Ns = tuple(int(n) for n in self.N)
        if not Ns or any(n < 1 for n in Ns) or any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ValueError(f"N list must be non-empty, positive and strictly increasing, got {list(self.N)}")
        object.__setattr__(self, "N", Ns)
        if int(self.trials) < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if int(self.grid_size) < 10:
            raise ValueError(f"test grid needs at least 10 points, got {self.grid_size}")
        if int(self.train_factor) < 1:
            raise ValueError(f"train_factor must be >= 1, got {self.train_factor}")
        if self.solver not in ("cod", "svd"):
            raise ValueError(f"solver must be cod or svd, got {self.solver!r}")
        if self.rank_rule not in ("relative", "absolute"):
            raise ValueError(f"rank_rule must be relative or absolute, got {self.rank_rule!r}")
        if self.tolerance is not None and not (float(self.tolerance) > 0):
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        bad = set(self.baselines) - set(BASELINES)
        if bad:
            raise ValueError(f"unknown baselines {sorted(bad)}; choose from {list(BASELINES)}")
        object.__setattr__(self, "baselines", tuple(self.baselines))
        for name in ("trials", "grid_size", "train_factor", "master_seed"):
            object.__setattr__(self, name, int(getattr(self, name)))

    def benchmark(self) -> BenchmarkFunction:
        return get_benchmark(self.function, **self.params)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("strategies", "N", "baselines"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d) -> "SweepConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ValueError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)


def trial_seed(master_seed, strategy, N, trial) -> int:
    """Per-trial seed derived from a hash of its coordinates."""
    key = f"{int(master_seed)}|{strategy}|{int(N)}|{int(trial)}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


# --------------------------------------------------------------------------
# error measurement


def _trapezoid_l2(diff, a, b) -> float:
    sq = np.square(diff)
    h = (b - a) / (sq.size - 1)
    return math.sqrt(h * (float(np.sum(sq)) - 0.5 * (sq[0] + sq[-1])))


def l2_error(f_true, f_approx, interval, grid_size=10_000) -> float:
    """L2 distance on ``interval`` by the composite trapezoidal rule.

    Both functions are sampled at ``grid_size`` equispaced points including
    the endpoints.

    Raises
    ------
    ValueError
        If either function returns a non-finite value; the message names the
        first offending abscissa.
    """
    if int(grid_size) < 2:
        raise ValueError(f"grid_size must be >= 2, got {grid_size}")
    a, b = _as_interval(interval)
    x = np.linspace(a, b, int(grid_size))
    ft = np.asarray(f_true(x), dtype=float) * np.ones_like(x)
    fa = np.asarray(f_approx(x), dtype=float) * np.ones_like(x)
    for name, v in (("reference", ft), ("approximation", fa)):
        bad = ~np.isfinite(v)
        if np.any(bad):
            raise ValueError(f"{name} is not finite at x={float(x[bad][0])!r}")
    return _trapezoid_l2(ft - fa, a, b)


# --------------------------------------------------------------------------
# sweeps

# state shared with worker processes, set once per pool
_WORKER: dict = {}


def _init_worker(fn, grid, yref):
    _WORKER.update(fn=fn, grid=grid, yref=yref)


def _grid_error(model, a, b) -> float:
    approx = np.asarray(model(_WORKER["grid"]), dtype=float)
    bad = ~np.isfinite(approx)
    if np.any(bad):
        raise NumericalError(f"approximation is not finite at x={_WORKER['grid'][bad][0]!r}")
    return _trapezoid_l2(approx - _WORKER["yref"], a, b)


def _run_trial(task):
    cfg, strategy, N, trial, seed = task
    fn = _WORKER["fn"]
    a, b = fn.domain
    label = solver_label(cfg.solver, cfg.rank_rule, cfg.tolerance)
    t0 = time.perf_counter()
    try:
        points = np.linspace(a, b, cfg.train_factor * N)
        system = assemble_system(fn, (a, b), N, SelectionStrategy(strategy, seed=seed), points)
        tol = cfg.tolerance if cfg.tolerance is not None else default_tolerance(system.R, points.size)
        sol = solve(system.R, system.rhs, cfg.solver, tol, cfg.rank_rule)
        err = _grid_error(system.model(sol), a, b)
        res, rank = sol.residual_norm, sol.effective_rank
    except (NumericalError, np.linalg.LinAlgError, ValueError):
        err, res, rank = math.inf, math.nan, -1
    wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
    return SweepRecord(fn.id, StrategyKind(strategy).short, label, N, trial, seed,
                       err, res, rank, wall)


def _run_baseline(task):
    cfg, name, N = task
    fn = _WORKER["fn"]
    a, b = fn.domain
    t0 = time.perf_counter()
    try:
        if name == "legendre":
            interp = legendre_interpolant(fn, N, (a, b))
            rank = N + 1
        else:
            interp = spline_interpolant(fn, N, (a, b))
            rank = N
        err = _grid_error(interp, a, b)
    except (NumericalError, ValueError):
        err, rank = math.inf, -1
    wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
    return SweepRecord(fn.id, name, "-", N, 0, 0, err, 0.0, rank, wall)


def _dispatch(kind, tasks, fn, grid, yref, workers):
    func = _run_trial if kind == "trial" else _run_baseline
    if workers <= 1 or len(tasks) < 2:
        _init_worker(fn, grid, yref)
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(fn, grid, yref)) as pool:
        # map preserves submission order, so the output order is fixed
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def worker_count(workers=None) -> int:
    """Process count: ``workers`` if given, else the CPU count, capped by RPNN_THREADS."""
    n = (os.cpu_count() or 1) if workers is None else int(workers)
    cap = os.environ.get("RPNN_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"RPNN_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def reference_grid(fn, grid_size):
    a, b = fn.domain
    grid = np.linspace(a, b, grid_size)
    yref = np.asarray(fn(grid), dtype=float)
    if not np.all(np.isfinite(yref)):
        raise ValueError(f"reference is not finite at x={grid[~np.isfinite(yref)][0]!r}")
    return grid, yref


def run_convergence_sweep(config: SweepConfig, workers=None) -> list[SweepRecord]:
    """All RPNN trials followed by one row per (baseline, N).

    Rows are ordered by (strategy, N, trial), then (baseline, N), whatever
    the number of worker processes.  Failed solves are kept as rows with an
    infinite error and rank -1.
    """
    fn = config.benchmark()
    grid, yref = reference_grid(fn, config.grid_size)
    tasks = [(config, s, N, t, trial_seed(config.master_seed, s, N, t))
             for s in config.strategies for N in config.N for t in range(config.trials)]
    n_workers = worker_count(workers)
    records = _dispatch("trial", tasks, fn, grid, yref, n_workers)
    base_tasks = [(config, name, N) for name in config.baselines for N in config.N]
    records += _dispatch("baseline", base_tasks, fn, grid, yref, 1)
    return records


def _tolerance_trial(task):
    fn_id, strategy, N, trial, seed, tols, solvers, rank_rule, train_factor, timing = task
    fn = _WORKER["fn"]
    a, b = fn.domain
    points = np.linspace(a, b, train_factor * N)
    out = {}
    try:
        system = assemble_system(fn, (a, b), N, SelectionStrategy(strategy, seed=seed), points)
    except ValueError:
        system = None
    for method in solvers:
        t0 = time.perf_counter()
        dec = None
        for tol in tols:
            label = solver_label(method, rank_rule, tol)
            try:
                if system is None:
                    raise ValueError("system assembly failed")
                if method == "svd":
                    dec = svd(system.R) if dec is None else dec
                    sol = tsvd_solve(system.R, system.rhs, tol, dec)
                else:
                    dec = rrqr_decompose(system.R, tol, rank_rule) if dec is None else dec
                    sol = cod_solve(system.R, system.rhs, tol, rank_rule, dec)
                err = _grid_error(system.model(sol), a, b)
                res, rank = sol.residual_norm, sol.effective_rank
            except (NumericalError, np.linalg.LinAlgError, ValueError):
                err, res, rank = math.inf, math.nan, -1
            wall = (time.perf_counter() - t0) * 1e3 if timing else 0.0
            out[(method, tol)] = SweepRecord(fn_id, StrategyKind(strategy).short, label, N, trial,
                                             seed, err, res, rank, wall)
    return out


def run_tolerance_sweep(function="f1", N=400, tolerances=DEFAULT_TOLERANCES, solvers=("svd", "cod"),
                        trials=100, strategy="function_informed", params=None, master_seed=0,
                        cod_rank_rule="absolute", grid_size=10_000, train_factor=5, timing=False,
                        workers=None) -> list[SweepRecord]:
    """Error against rank tolerance at fixed N for each solver.

    Each trial draws one set of internal parameters and factorizes the
    design matrix once per solver; every tolerance re-truncates that
    factorization.  By default the COD compares pivots with the tolerance
    directly (``cod_rank_rule="absolute"``), the same way the SVD route
    compares singular values, so both solvers see the same epsilon.

    Rows are ordered by (solver, tolerance, trial).
    """
    fn = function if isinstance(function, BenchmarkFunction) else get_benchmark(function, **(params or {}))
    tols = tuple(float(t) for t in tolerances)
    if not tols or any(not t > 0 for t in tols):
        raise ValueError("tolerances must be a non-empty list of positive numbers")
    for m in solvers:
        if m not in ("svd", "cod"):
            raise ValueError(f"unknown solver {m!r}")
    if int(trials) < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    strategy = StrategyKind.parse(strategy).value
    grid, yref = reference_grid(fn, grid_size)
    tasks = [(fn.id, strategy, int(N), t, trial_seed(master_seed, strategy, N, t), tols,
              tuple(solvers), cod_rank_rule, int(train_factor), timing) for t in range(int(trials))]
    results = _dispatch_tolerance(tasks, fn, grid, yref, worker_count(workers))
    return [res[(m, tol)] for m in solvers for tol in tols for res in results]


def _dispatch_tolerance(tasks, fn, grid, yref, workers):
    if workers <= 1 or len(tasks) < 2:
        _init_worker(fn, grid, yref)
        return [_tolerance_trial(t) for t in tasks]
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(fn, grid, yref)) as pool:
        return list(pool.map(_tolerance_trial, tasks))


# --------------------------------------------------------------------------
# aggregation and output


@dataclass(frozen=True)
class CellSummary:
    function: str
    strategy: str
    solver: str
    N: int
    trials: int
    failures: int
    geo_mean: float
    arith_mean: float


def geometric_mean(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan
    if np.any(np.isinf(v)):
        return math.inf
    if np.any(v == 0):
        return 0.0
    return float(np.exp(np.mean(np.log(v))))


def summarize(records) -> list[CellSummary]:
    """Geometric and arithmetic mean of the L2 error per (function, strategy, solver, N).

    Cells keep the order of their first appearance.
    """
    cells: dict = {}
    for r in records:
        cells.setdefault((r.function, r.strategy, r.solver, r.N), []).append(r.l2_error)
    out = []
    for (f, s, solver, N), errs in cells.items():
        errs = np.asarray(errs, dtype=float)
        out.append(CellSummary(f, s, solver, N, errs.size, int(np.sum(~np.isfinite(errs))),
                               geometric_mean(errs), float(np.mean(errs))))
    return out


def cell_lookup(summary) -> dict:
    return {(c.strategy, c.solver, c.N): c for c in summary}


def emit_csv(records, path) -> Path:
    """Write records with the fixed header; floats use round-trip ``repr``."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in records:
                w.writerow(r.row())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> list[SweepRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path} does not start with the sweep header")
    return [SweepRecord.from_row(r) for r in rows[1:]]


def emit_summary_csv(summary, path) -> Path:
    summary = list(summary)
    if not summary:
        raise ValueError("empty summary")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["function", "strategy", "solver", "N", "trials", "failures",
                    "geo_mean_l2", "arith_mean_l2"])
        for c in summary:
            w.writerow([c.function, c.strategy, c.solver, c.N, c.trials, c.failures,
                        repr(c.geo_mean), repr(c.arith_mean)])
    return path


_PLOT_TEMPLATE = '''"""Convergence diagrams generated from a sweep; run with python."""

import json
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CELLS = json.loads({cells!r})
OUTPUT = {output!r}


def tolerance_of(solver):
    tail = solver.rsplit("/", 1)[-1]
    return None if tail in ("auto", "-") else float(tail)


functions = sorted({{c["function"] for c in CELLS}})
fig, axes = plt.subplots(1, len(functions), figsize=(5.5 * len(functions), 4.2), squeeze=False)
for ax, fname in zip(axes[0], functions):
    cells = [c for c in CELLS if c["function"] == fname]
    by_tol = all(tolerance_of(c["solver"]) is not None for c in cells)
    series = {{}}
    for c in cells:
        if by_tol:
            key = c["solver"].rsplit("/", 1)[0]
            x = tolerance_of(c["solver"])
        else:
            key = c["strategy"] if c["solver"] == "-" else c["strategy"] + " " + c["solver"]
            x = c["N"]
        if math.isfinite(c["geo_mean"]) and c["geo_mean"] > 0:
            series.setdefault(key, []).append((x, c["geo_mean"]))
    for key, pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, label=key)
    ax.set_yscale("log")
    if by_tol:
        ax.set_xscale("log")
        ax.set_xlabel("tolerance")
    else:
        ax.set_xlabel("N")
    ax.set_ylabel("L2 error (geometric mean)")
    ax.set_title(fname)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(OUTPUT, dpi=150)
print("wrote", OUTPUT)
'''


def emit_plot_script(records, path, image=None) -> Path:
    """Write a standalone matplotlib script plotting geometric-mean error.

    One log-y panel per function: error against N for convergence sweeps,
    against tolerance (log-log) when every row carries an explicit tolerance.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to plot")
    path = Path(path)
    image = str(path.with_suffix(".png")) if image is None else str(image)
    cells = [dict(function=c.function, strategy=c.strategy, solver=c.solver, N=c.N,
                  geo_mean=c.geo_mean if math.isfinite(c.geo_mean) else -1.0)
             for c in summarize(records)]
    path.write_text(_PLOT_TEMPLATE.format(cells=json.dumps(cells), output=image))
    return path

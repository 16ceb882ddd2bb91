import json
import math

import numpy as np
import pytest

from rpnn import harness
from rpnn.baselines import legendre_interpolant, spline_interpolant
from rpnn.benchmarks import BENCHMARK_IDS, get_benchmark
from rpnn.harness import (
    CSV_HEADER,
    SweepConfig,
    SweepRecord,
    emit_csv,
    emit_plot_script,
    emit_summary_csv,
    geometric_mean,
    l2_error,
    read_csv,
    run_convergence_sweep,
    run_tolerance_sweep,
    solver_label,
    summarize,
    trial_seed,
    worker_count,
)
from rpnn.selection import SelectionStrategy
from rpnn.training import fit_rpnn


class TestL2:
    def test_identical(self):
        assert l2_error(np.sin, np.sin, (0, 1)) == 0.0

    def test_constant(self):
        assert l2_error(lambda x: np.ones_like(x), lambda x: 0.0, (0, 1)) == pytest.approx(1.0, abs=1e-15)

    def test_linear(self):
        assert abs(l2_error(lambda x: x, lambda x: 0.0, (0, 1), 10_000) - 1 / math.sqrt(3)) <= 1e-7

    def test_non_finite_names_abscissa(self):
        with pytest.raises(ValueError, match="x=0.5"):
            l2_error(lambda x: np.where(x == 0.5, np.nan, x), lambda x: 0.0, (0, 1), 3)

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            l2_error(np.sin, np.cos, (0, 1), 1)


@pytest.mark.parametrize("fid", BENCHMARK_IDS)
def test_grid_refinement_changes_error_by_less_than_one_percent(fid):
    fn = get_benchmark(fid)
    approximants = [
        fit_rpnn(fn, fn.domain, 40, SelectionStrategy("informed", seed=1)).model,
        legendre_interpolant(fn, 40, fn.domain),
        spline_interpolant(fn, 40, fn.domain),
    ]
    for q in approximants:
        e1, e2 = l2_error(fn, q, fn.domain, 10_000), l2_error(fn, q, fn.domain, 20_000)
        assert abs(e1 - e2) < 0.01 * e2


def _small_config(**kw):
    base = dict(function="f1", params={"k": 10}, strategies=["function_agnostic"], N=[5], trials=1)
    base.update(kw)
    return SweepConfig(**base)


class TestConvergenceSweep:
    def test_shape(self):
        recs = run_convergence_sweep(_small_config(), workers=1)
        assert len(recs) == 3
        rpnn, *base = recs
        assert (rpnn.strategy, rpnn.N, rpnn.trial) == ("agnostic", 5, 0)
        assert rpnn.seed == trial_seed(0, "function_agnostic", 5, 0)
        assert rpnn.l2_error > 0 and rpnn.effective_rank == 6
        assert [r.strategy for r in base] == ["legendre", "spline"]
        assert all(np.isfinite(r.l2_error) for r in recs)

    def test_order_and_count(self):
        cfg = _small_config(strategies=["naive", "informed"], N=[4, 8], trials=3, baselines=["spline"])
        recs = run_convergence_sweep(cfg, workers=1)
        keys = [(r.strategy, r.N, r.trial) for r in recs[:-2]]
        assert keys == [(s, N, t) for s in ("naive", "informed") for N in (4, 8) for t in range(3)]
        assert len(recs) == 14

    def test_deterministic_across_worker_counts(self, tmp_path):
        cfg = _small_config(strategies=["naive", "informed"], N=[5, 10], trials=4)
        a = emit_csv(run_convergence_sweep(cfg, workers=1), tmp_path / "a.csv").read_bytes()
        b = emit_csv(run_convergence_sweep(cfg, workers=2), tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_master_seed_changes_output(self):
        r0 = run_convergence_sweep(_small_config(baselines=[]), workers=1)[0]
        r1 = run_convergence_sweep(_small_config(baselines=[], master_seed=1), workers=1)[0]
        assert r0.seed != r1.seed and r0.l2_error != r1.l2_error

    def test_timing_flag(self):
        r = run_convergence_sweep(_small_config(baselines=[], timing=True), workers=1)[0]
        assert r.wall_time_ms > 0


class TestConfig:
    @pytest.mark.parametrize("bad", [
        {"trials": 0}, {"N": [10, 5]}, {"N": []}, {"grid_size": 9}, {"function": "f9"},
        {"strategies": ["random"]}, {"solver": "lu"}, {"baselines": ["chebyshev"]},
        {"params": {"q": 1}}, {"tolerance": -1.0},
    ])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            _small_config(**bad)

    def test_round_trip(self, tmp_path):
        cfg = _small_config(tolerance=1e-12, rank_rule="absolute")
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert SweepConfig.load(path) == cfg

    def test_unknown_keys(self):
        with pytest.raises(ValueError):
            SweepConfig.from_dict({"function": "f1", "colour": "red"})


class TestToleranceSweep:
    def test_shape(self):
        recs = run_tolerance_sweep("f1", N=20, tolerances=[1e-10], trials=1, workers=1)
        assert len(recs) == 2
        assert [r.solver for r in recs] == ["svd/abs/1e-10", "cod/abs/1e-10"]

    def test_order(self):
        recs = run_tolerance_sweep("f1", N=10, tolerances=[1e-6, 1e-12], trials=2, workers=1)
        assert [(r.solver, r.trial) for r in recs] == [
            (solver_label(s, "absolute", t), i) for s in ("svd", "cod") for t in (1e-6, 1e-12) for i in range(2)]

    def test_reuses_factorization(self):
        # the same trial seed is used for every tolerance, so the errors at a
        # loose and a tight tolerance come from the same network
        recs = run_tolerance_sweep("f1", N=30, tolerances=[1e-2, 1e-12], solvers=["cod"], trials=1, workers=1)
        assert recs[0].seed == recs[1].seed
        assert recs[0].effective_rank < recs[1].effective_rank


class TestOutput:
    def _records(self, n=3):
        return [SweepRecord("f1(k=10)", "naive", "cod/rel/auto", 5, t, 17 + t, 0.1 / (t + 3),
                            1e-3 * t, 6, 0.0) for t in range(n)]

    def test_csv_lines_and_header(self, tmp_path):
        path = emit_csv(self._records(), tmp_path / "out.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0] == "function,strategy,solver,N,trial,seed,l2_error,residual_norm,effective_rank,wall_time_ms"
        assert tuple(lines[0].split(",")) == CSV_HEADER

    def test_round_trip(self, tmp_path):
        recs = self._records() + [SweepRecord("f1", "naive", "svd/abs/1e-08", 5, 3, 0, math.inf, math.nan, -1)]
        back = read_csv(emit_csv(recs, tmp_path / "out.csv"))
        assert [r.row() for r in back] == [r.row() for r in recs]
        assert back[0] == recs[0]

    def test_empty_records(self, tmp_path):
        with pytest.raises(ValueError):
            emit_csv([], tmp_path / "out.csv")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            emit_csv(self._records(), tmp_path / "missing" / "out.csv")

    def test_summary(self, tmp_path):
        recs = self._records()
        (cell,) = summarize(recs)
        errs = [r.l2_error for r in recs]
        assert cell.geo_mean == pytest.approx(math.exp(np.mean(np.log(errs))), rel=1e-14)
        assert cell.arith_mean == pytest.approx(np.mean(errs), rel=1e-14)
        text = emit_summary_csv([cell], tmp_path / "s.csv").read_text()
        assert text.startswith("function,strategy,solver,N,trials,failures,geo_mean_l2,arith_mean_l2")

    def test_geometric_mean_edge_cases(self):
        assert geometric_mean([1e-2, 1e-6]) == pytest.approx(1e-4)
        assert geometric_mean([1.0, math.inf]) == math.inf
        assert math.isnan(geometric_mean([]))

    def test_plot_script_compiles(self, tmp_path):
        path = emit_plot_script(self._records(), tmp_path / "plot.py", image="fig.png")
        compile(path.read_text(), str(path), "exec")

    def test_plot_script_runs(self, tmp_path):
        pytest.importorskip("matplotlib")
        import subprocess
        import sys
        recs = run_tolerance_sweep("f1", N=10, tolerances=[1e-6, 1e-12], trials=1, workers=1)
        path = emit_plot_script(recs, tmp_path / "plot.py", image=str(tmp_path / "fig.png"))
        subprocess.run([sys.executable, str(path)], check=True, env={"MPLBACKEND": "Agg", "PATH": ""})
        assert (tmp_path / "fig.png").stat().st_size > 0


def test_worker_count(monkeypatch):
    monkeypatch.setenv("RPNN_THREADS", "1")
    assert worker_count(8) == 1
    monkeypatch.delenv("RPNN_THREADS")
    assert worker_count(3) == 3 and worker_count() >= 1
    assert harness.solver_label("cod", "relative", None) == "cod/rel/auto"

"""Fit the linear readout of a network with fixed internal parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DesignMatrix, RpnnModel, _as_interval, build_design_matrix, normalize_inputs
from .selection import GeneratedParams, SelectionStrategy, generate, output_range_of
from .solvers import LeastSquaresSolution, default_tolerance, solve


@dataclass(frozen=True, eq=False)
class FitResult:
    model: RpnnModel
    solution: LeastSquaresSolution
    train_x: np.ndarray
    train_y: np.ndarray

    @property
    def tolerance(self) -> float:
        return self.solution.tolerance


def training_points(N, domain, factor=5) -> np.ndarray:
    """``factor * N`` equispaced points on ``domain``, endpoints included."""
    a, b = _as_interval(domain)
    return np.linspace(a, b, int(factor * N))


def fit_rpnn(f, domain, N, strategy: SelectionStrategy, method="cod", tol=None,
             rank_rule="relative", points=None, selection_samples=None) -> FitResult:
    """Draw internal parameters, then solve for offset and readout weights.

    Parameters
    ----------
    f : callable
        Vectorized target.
    domain : (float, float)
    N : int
        Number of neurons.
    strategy : SelectionStrategy
    method : {"cod", "svd"}
    tol : float, optional
        Rank tolerance; defaults to ``n ulp(||R||_2) / 1000`` with ``n`` the
        number of training points.
    rank_rule : {"relative", "absolute"}
        How the COD compares pivots with ``tol``; the SVD route is always
        absolute.
    points : array_like, optional
        Training abscissae; ``5 N`` equispaced points by default.
    selection_samples : (x, y), optional
        Samples handed to the function-informed rule; the training data by
        default.

    Notes
    -----
    Naive and function-informed parameters act on inputs mapped to [-1, 1];
    their models also fit outputs mapped to [-1, 1] from the range of the
    training data.  Function-agnostic parameters act on raw data.
    """
    system = assemble_system(f, domain, N, strategy, points, selection_samples)
    if tol is None:
        tol = default_tolerance(system.R, system.x.size)
    sol = solve(system.R, system.rhs, method, tol, rank_rule)
    return FitResult(system.model(sol), sol, system.x, system.y)


@dataclass(frozen=True, eq=False)
class TrainingSystem:
    """Collocation system for one draw of internal parameters.

    ``rhs`` is the training data in the coordinates the parameters act on
    (mapped to [-1, 1] for naive and function-informed draws).
    """

    params: GeneratedParams
    R: DesignMatrix
    rhs: np.ndarray
    x: np.ndarray
    y: np.ndarray
    domain: tuple
    output_range: tuple | None

    def model(self, sol: LeastSquaresSolution) -> RpnnModel:
        return RpnnModel(self.params.alphas, self.params.betas, sol.weights, sol.offset,
                         self.domain, self.output_range, self.params.normalized)


def assemble_system(f, domain, N, strategy: SelectionStrategy, points=None,
                    selection_samples=None) -> TrainingSystem:
    """Sample the target, draw internal parameters and build the design matrix."""
    a, b = _as_interval(domain)
    x = training_points(N, (a, b)) if points is None else np.asarray(points, dtype=float).reshape(-1)
    y = np.asarray(f(x), dtype=float).reshape(-1)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise ValueError(f"target is not finite at x={bad!r}")
    samples = (x, y) if selection_samples is None else selection_samples
    params = generate(strategy, N, (a, b), samples)
    if params.normalized:
        out_range = output_range_of(y)
        xin = normalize_inputs(x, (a, b))
        rhs = (2.0 * y - out_range[0] - out_range[1]) / (out_range[1] - out_range[0])
    else:
        out_range = None
        xin, rhs = x, y
    R = build_design_matrix(params.alphas, params.betas, xin)
    return TrainingSystem(params, R, rhs, x, y, (a, b), out_range)

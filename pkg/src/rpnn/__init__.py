"""Random projection neural networks for one-dimensional function approximation."""

from .core import (
    Activation,
    DeepRpnnModel,
    DesignMatrix,
    NumericalError,
    RpnnModel,
    build_design_matrix,
    evaluate,
    sigmoid,
)
from .selection import SelectionStrategy, StrategyKind, generate
from .solvers import cod_solve, default_tolerance, solve, tsvd_solve
from .training import fit_rpnn

__all__ = [
    "Activation",
    "DeepRpnnModel",
    "DesignMatrix",
    "NumericalError",
    "RpnnModel",
    "SelectionStrategy",
    "StrategyKind",
    "build_design_matrix",
    "cod_solve",
    "default_tolerance",
    "evaluate",
    "fit_rpnn",
    "generate",
    "sigmoid",
    "solve",
    "tsvd_solve",
]

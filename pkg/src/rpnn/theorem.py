"""Executable checks of two constructive facts about shallow sigmoid networks.

* Exact interpolation: with N neurons plus an offset, N + 1 distinct points
  can be interpolated exactly for almost every draw of internal parameters.
* Polynomial mimicry: replace the target by a degree-n polynomial
  ``P(x) = sum_k a_k x^k`` and the activation by a degree-n polynomial
  ``Q(u) = sum_s b_s u^s``.  The network
  ``G(x) = offset + sum_j w_j Q(alpha_j (x - c_j))`` with n neurons is then a
  polynomial of degree n whose coefficients are linear in ``w``, so ``G = P``
  reduces to a square linear system ``M w = (a_1, ..., a_n)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from .benchmarks import get_benchmark
from .core import NumericalError, _as_interval, build_design_matrix, sigmoid
from .selection import SelectionStrategy, generate, naive_selection
from .solvers import cod_solve

MAX_COND = 1e15


def chebyshev_proxy(f, interval, n) -> np.ndarray:
    """Monomial coefficients (lowest first, length n+1) of the degree-n
    Chebyshev interpolant of ``f`` on ``interval``.

    The coefficients refer to the variable ``x`` on ``interval`` itself, not
    to a rescaled variable.  Converting to the monomial basis is increasingly
    ill-conditioned; a warning is issued for ``n > 30``.
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    if n > 30:
        warnings.warn(f"monomial conversion of a degree-{n} interpolant is ill-conditioned",
                      RuntimeWarning, stacklevel=2)
    a, b = _as_interval(interval)
    cheb = Chebyshev.interpolate(lambda t: np.asarray(f(t), dtype=float), n, domain=[a, b])
    coef = cheb.convert(kind=Polynomial, domain=[-1, 1], window=[-1, 1]).coef
    out = np.zeros(n + 1)
    out[: coef.size] = coef[: n + 1]
    return out


def activation_interval(alphas, betas, grid) -> tuple[float, float]:
    """Range of ``alpha_j x + beta_j`` over all neurons and grid points."""
    u = np.outer(np.asarray(grid, dtype=float), alphas) + np.asarray(betas, dtype=float)
    lo, hi = float(u.min()), float(u.max())
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


def _check_neurons(alphas, centers):
    alphas = np.asarray(alphas, dtype=float).reshape(-1)
    centers = np.asarray(centers, dtype=float).reshape(-1)
    if alphas.shape != centers.shape:
        raise ValueError("alphas and centers differ in length")
    if np.any(alphas == 0):
        raise ValueError("every slope alpha_j must be nonzero")
    pairs = set(zip(alphas.tolist(), centers.tolist()))
    if len(pairs) != alphas.size:
        raise ValueError("(alpha, center) pairs must be pairwise distinct")
    return alphas, centers


def expansion_matrix(alphas, centers, b_coeffs) -> np.ndarray:
    """All monomial coefficients of ``Q(alpha_j (x - c_j))``: entry [k, j] is
    the coefficient of ``x^k``, for ``k = 0..n``.

    Expanding ``(alpha (x - c))^s`` binomially gives

        E[k, j] = sum_{s=k}^{n} C(s, k) b_s alpha_j^s (-c_j)^(s-k).
    """
    alphas, centers = _check_neurons(alphas, centers)
    b = np.asarray(b_coeffs, dtype=float).reshape(-1)
    n = b.size - 1
    E = np.zeros((n + 1, alphas.size))
    for k in range(n + 1):
        for s in range(k, n + 1):
            E[k] += math.comb(s, k) * b[s] * alphas ** s * (-centers) ** (s - k)
    return E


def build_M(alphas, centers, b_coeffs, n) -> np.ndarray:
    """The n x n matrix mapping readout weights to the coefficients of
    ``x^1..x^n``; row ``k - 1`` holds the ``x^k`` coefficients."""
    n = int(n)
    b = np.asarray(b_coeffs, dtype=float).reshape(-1)
    if b.size != n + 1:
        raise ValueError(f"need n + 1 = {n + 1} activation coefficients, got {b.size}")
    if np.asarray(alphas).size != n:
        raise ValueError(f"the square construction needs N = n = {n} neurons, got {np.asarray(alphas).size}")
    return expansion_matrix(alphas, centers, b)[1:]


@dataclass(frozen=True, eq=False)
class MimicryProblem:
    """Target coefficients ``a``, activation proxy ``b`` and the neurons.

    Both coefficient vectors are in the monomial basis, lowest degree first,
    with length ``n + 1``.
    """

    a: np.ndarray
    b: np.ndarray
    alphas: np.ndarray
    centers: np.ndarray
    betas: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.size != b.size or a.size < 2:
            raise ValueError("a and b need the same length n + 1 >= 2")
        if b[-1] == 0:
            raise ValueError("the activation proxy needs a nonzero leading coefficient b_n")
        alphas, centers = _check_neurons(self.alphas, self.centers)
        if alphas.size != a.size - 1:
            raise ValueError(f"need N = n = {a.size - 1} neurons, got {alphas.size}")
        if self.betas is None:
            betas = -alphas * centers
        else:
            betas = np.asarray(self.betas, dtype=float).reshape(-1)
            if betas.shape != alphas.shape:
                raise ValueError("betas and alphas differ in length")
        for name, v in (("a", a), ("b", b), ("alphas", alphas), ("centers", centers), ("betas", betas)):
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.a.size - 1

    @property
    def M(self) -> np.ndarray:
        return build_M(self.alphas, self.centers, self.b, self.n)


@dataclass(frozen=True, eq=False)
class MimicrySolution:
    weights: np.ndarray
    offset: float
    cond: float
    residual: float


def _exact_expansion(alphas, betas, b) -> list:
    """Coefficients of ``Q(alpha_j x + beta_j)`` as exact rationals, [k][j]."""
    n = len(b) - 1
    bq = [Fraction(float(v)) for v in b]
    E = [[Fraction(0)] * len(alphas) for _ in range(n + 1)]
    for j, (al, be) in enumerate(zip(alphas, betas)):
        al, be = Fraction(float(al)), Fraction(float(be))
        for s in range(n + 1):
            for k in range(s + 1):
                E[k][j] += math.comb(s, k) * bq[s] * al ** k * be ** (s - k)
    return E


def mimic_weights(problem: MimicryProblem, refinement_steps=4) -> MimicrySolution:
    """Readout weights and offset making ``G`` equal to the target polynomial.

    The system ``M w = (a_1, ..., a_n)`` is solved in double precision and
    then refined: each step computes the residual exactly, in rational
    arithmetic from the network's own ``(alpha_j, beta_j)``, and solves for a
    correction with the same matrix.  This drives ``w`` to the correctly
    rounded solution while ``cond(M) * eps`` stays well below one.  The
    offset absorbs the constant terms ``Q(beta_j)`` of every neuron,
    ``offset = a_0 - sum_j w_j Q(beta_j)``, and is also evaluated exactly.

    Raises
    ------
    NumericalError
        When the 2-norm condition number of ``M`` exceeds 1e15.
    """
    M = expansion_matrix(problem.alphas, problem.centers, problem.b)[1:]
    cond = float(np.linalg.cond(M))
    if not cond <= MAX_COND:
        raise NumericalError(
            f"mimicry matrix is numerically singular (n={problem.n}, cond={cond:.3e} > {MAX_COND:.0e}); "
            "the slopes or centers are too close together")
    E = _exact_expansion(problem.alphas, problem.betas, problem.b)
    a = [Fraction(float(v)) for v in problem.a]
    n = problem.n

    def residual(w):
        wq = [Fraction(float(v)) for v in w]
        return [a[k] - sum(E[k][j] * wq[j] for j in range(n)) for k in range(1, n + 1)]

    w = np.linalg.solve(M, problem.a[1:])
    r = residual(w)
    for _ in range(refinement_steps):
        if not any(r):
            break
        w_new = w + np.linalg.solve(M, np.array([float(v) for v in r]))
        r_new = residual(w_new)
        if max(abs(v) for v in r_new) >= max(abs(v) for v in r):
            break
        w, r = w_new, r_new
    offset = float(a[0] - sum(E[0][j] * Fraction(float(w[j])) for j in range(n)))
    res = math.sqrt(float(sum(v * v for v in r)))
    return MimicrySolution(w, offset, cond, res)


def network_polynomial(b, alphas, betas, weights, offset) -> np.ndarray:
    """Monomial coefficients of ``offset + sum_j w_j Q(alpha_j x + beta_j)``.

    Built by exact rational composition of polynomials (Horner in the inner
    variable), independently of the binomial expansion behind ``M``, and
    rounded once at the end.
    """
    n = len(b) - 1

    def mul(p, q):
        out = [Fraction(0)] * (len(p) + len(q) - 1)
        for i, pi in enumerate(p):
            for j, qj in enumerate(q):
                out[i + j] += pi * qj
        return out

    G = [Fraction(float(offset))] + [Fraction(0)] * n
    for al, be, w in zip(alphas, betas, weights):
        inner = [Fraction(float(be)), Fraction(float(al))]
        comp = [Fraction(float(b[n]))]
        for s in range(n - 1, -1, -1):
            comp = mul(comp, inner)
            comp[0] += Fraction(float(b[s]))
        wq = Fraction(float(w))
        for k, c in enumerate(comp[: n + 1]):
            G[k] += wq * c
    return np.array([float(v) for v in G])


@dataclass(frozen=True, eq=False)
class MimicryReport:
    n: int
    cond: float
    coeff_error: float  # max_k |G_k - a_k| / max_k |a_k|
    solution: MimicrySolution
    problem: MimicryProblem


def mimicry_problem(target, n, seed=0, interval=(-1.0, 1.0), grid_size=10_000) -> MimicryProblem:
    """Mimicry setup for ``target`` on ``interval`` with naive neurons.

    The input is mapped to [-1, 1]; alphas and betas are uniform on
    [-1, 1].  The target proxy is its Chebyshev interpolant on [-1, 1] (in
    the mapped variable) and the sigmoid proxy is taken on the range
    actually swept by ``alpha_j x + beta_j`` over a ``grid_size`` grid.
    """
    a_lo, b_hi = _as_interval(interval)
    params = naive_selection(n, seed)
    a = chebyshev_proxy(lambda t: target(a_lo + (t + 1.0) * (b_hi - a_lo) / 2.0), (-1.0, 1.0), n)
    grid = np.linspace(-1.0, 1.0, grid_size)
    b = chebyshev_proxy(sigmoid, activation_interval(params.alphas, params.betas, grid), n)
    return MimicryProblem(a, b, params.alphas, -params.betas / params.alphas, params.betas)


def mimicry_identity(target, n, seed=0, interval=(-1.0, 1.0)) -> MimicryReport:
    """Solve the mimicry system and compare the rebuilt polynomial with the target's."""
    prob = mimicry_problem(target, n, seed, interval)
    sol = mimic_weights(prob)
    G = network_polynomial(prob.b, prob.alphas, prob.betas, sol.weights, sol.offset)
    err = float(np.max(np.abs(G - prob.a)) / np.max(np.abs(prob.a)))
    return MimicryReport(prob.n, sol.cond, err, sol, prob)


def condition_trend(target, n_values, seeds=range(20), interval=(-1.0, 1.0)) -> np.ndarray:
    """Geometric mean of cond(M) over ``seeds`` for each degree in ``n_values``."""
    out = []
    for n in n_values:
        conds = [np.linalg.cond(mimicry_problem(target, n, s, interval).M) for s in seeds]
        out.append(float(np.exp(np.mean(np.log(conds)))))
    return np.array(out)


# --------------------------------------------------------------------------
# exact interpolation


@dataclass(frozen=True, eq=False)
class InterpolationCheck:
    N: int
    points: np.ndarray
    residual_max: float
    scale: float  # max |y|
    effective_rank: int

    @property
    def relative_residual(self) -> float:
        return self.residual_max / self.scale if self.scale > 0 else self.residual_max


def exact_interpolation_check(N, strategy="agnostic", seed=0, function=None, points=None,
                              tol=None) -> InterpolationCheck:
    """Interpolate ``function`` at N + 1 points with N neurons plus offset.

    The square system is solved by COD with a rank tolerance of one
    machine epsilon (relative to the largest pivot).  A numerically singular
    system shows up as a large residual, not as an exception.

    Parameters
    ----------
    N : int
    strategy : str or SelectionStrategy
    seed : int
    function : BenchmarkFunction or callable with ``domain``, optional
        Defaults to ``f1`` with ``k = 10`` on [0, 1].
    points : array_like, optional
        N + 1 distinct abscissae; equispaced on the domain by default.
    """
    fn = get_benchmark("f1", k=10) if function is None else function
    domain = getattr(fn, "domain", (-1.0, 1.0))
    a, b = _as_interval(domain)
    if not isinstance(strategy, SelectionStrategy):
        strategy = SelectionStrategy(strategy, seed=seed)
    x = np.linspace(a, b, N + 1) if points is None else np.asarray(points, dtype=float).reshape(-1)
    if x.size != N + 1:
        raise ValueError(f"need N + 1 = {N + 1} points, got {x.size}")
    if np.unique(x).size != x.size:
        raise ValueError("interpolation points must be pairwise distinct")
    y = np.asarray(fn(x), dtype=float)
    # the informed rule reads the target on a finer grid than the N + 1 nodes
    xs = np.linspace(a, b, max(5 * N, 2 * N + 1))
    params = generate(strategy, N, (a, b), (xs, np.asarray(fn(xs), dtype=float)))
    xin = (2.0 * x - a - b) / (b - a) if params.normalized else x
    R = build_design_matrix(params.alphas, params.betas, xin)
    sol = cod_solve(R, y, np.finfo(float).eps if tol is None else tol, "relative")
    resid = float(np.max(np.abs(R.entries @ sol.wtilde - y)))
    return InterpolationCheck(N, x, resid, float(np.max(np.abs(y))), sol.effective_rank)

"""A priori choice of the fixed internal weights and biases.

Three rules are provided:

* ``naive``: alpha and beta i.i.d. uniform on [-1, 1] acting on inputs
  normalized to [-1, 1];
* ``function_agnostic``: slopes uniform in a range that grows with N and
  shrinks with the domain width, centers inside the domain;
* ``function_informed``: equally spaced centers on [-1, 1] whose slopes follow
  a finite difference estimate of the (normalized) target's derivative, plus
  uniform jitter.

All rules are pure functions of their inputs and the seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import _as_interval, normalize_inputs

DEFAULT_GAMMA = 1.5


class StrategyKind(str, enum.Enum):
    NAIVE = "naive"
    FUNCTION_AGNOSTIC = "function_agnostic"
    FUNCTION_INFORMED = "function_informed"

    @classmethod
    def parse(cls, name: str) -> "StrategyKind":
        aliases = {"agnostic": cls.FUNCTION_AGNOSTIC, "informed": cls.FUNCTION_INFORMED}
        key = str(name).strip().lower().replace("-", "_")
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(
                f"unknown strategy {name!r}; choose naive, agnostic or informed"
            ) from None

    @property
    def short(self) -> str:
        return {"naive": "naive", "function_agnostic": "agnostic",
                "function_informed": "informed"}[self.value]


@dataclass(frozen=True)
class SelectionStrategy:
    """Configuration of a parameter generation rule.

    ``centers`` only affects the function-agnostic rule and is either
    ``"random"`` (uniform in the domain) or ``"equispaced"``.
    """

    kind: StrategyKind
    seed: int = 0
    gamma: float = DEFAULT_GAMMA
    centers: str = "random"

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind.parse(self.kind))
        if self.centers not in ("random", "equispaced"):
            raise ValueError(f"centers must be 'random' or 'equispaced', got {self.centers!r}")
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True, eq=False)
class GeneratedParams:
    """Internal parameters together with the coordinates they act on.

    ``normalized`` tells whether ``alphas``/``betas`` expect inputs mapped to
    [-1, 1] (naive and informed rules) or raw inputs (agnostic rule).
    """

    alphas: np.ndarray
    betas: np.ndarray
    normalized: bool

    @property
    def centers(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.alphas != 0, -self.betas / self.alphas, np.nan)

    def __len__(self):
        return self.alphas.size


def _check_n(N) -> int:
    if int(N) != N or N < 1:
        raise ValueError(f"number of neurons must be a positive integer, got {N}")
    return int(N)


def _redraw_collisions(alphas, betas, redraw):
    """Replace any pair equal to +-(an earlier pair) using ``redraw(j)``.

    ``redraw`` returns a fresh (alpha, beta) for index j.  Exact ties have
    probability zero under the continuous samplers, so this loop almost never
    runs, but it keeps the basis functions independent.
    """
    for _ in range(100):
        seen = {}
        clash = None
        for j, (a, b) in enumerate(zip(alphas.tolist(), betas.tolist())):
            if (a, b) in seen or (-a, -b) in seen:
                clash = j
                break
            seen[(a, b)] = j
        if clash is None:
            return alphas, betas
        alphas[clash], betas[clash] = redraw(clash)
    raise RuntimeError("could not separate colliding internal parameters")


def agnostic_alpha_bound(N, interval) -> float:
    """Half-width of the uniform slope distribution, (400 + 9N) / (10 (b - a))."""
    a, b = _as_interval(interval)
    return (400.0 + 9.0 * N) / (10.0 * (b - a))


def informed_noise_bound(N) -> float:
    """Half-width of the slope jitter on the normalized domain (width 2)."""
    return (400.0 + 9.0 * N) / (100.0 * 2.0)


def naive_selection(N, seed) -> GeneratedParams:
    N = _check_n(N)
    rng = np.random.default_rng(seed)
    alphas = rng.uniform(-1.0, 1.0, N)
    betas = rng.uniform(-1.0, 1.0, N)
    alphas, betas = _redraw_collisions(
        alphas, betas, lambda j: (rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
    return GeneratedParams(alphas, betas, normalized=True)


def function_agnostic_selection(N, domain, seed, centers="random") -> GeneratedParams:
    """Slopes uniform in +-(400 + 9N)/(10 (b - a)), centers inside [a, b].

    The biases follow from the centers as ``beta_j = -alpha_j * c_j``.
    """
    N = _check_n(N)
    a, b = _as_interval(domain)
    rng = np.random.default_rng(seed)
    bound = agnostic_alpha_bound(N, (a, b))
    alphas = rng.uniform(-bound, bound, N)
    if centers == "random":
        c = rng.uniform(a, b, N)
    elif centers == "equispaced":
        c = np.linspace(a, b, N) if N > 1 else np.array([0.5 * (a + b)])
    else:
        raise ValueError(f"centers must be 'random' or 'equispaced', got {centers!r}")
    betas = -alphas * c

    def redraw(j):
        alpha = rng.uniform(-bound, bound)
        cj = rng.uniform(a, b) if centers == "random" else c[j]
        return alpha, -alpha * cj

    alphas, betas = _redraw_collisions(alphas, betas, redraw)
    return GeneratedParams(alphas, betas, normalized=False)


def output_range_of(y) -> tuple[float, float]:
    """Range [c, d] used to normalize outputs; widened if the data are constant."""
    y = np.asarray(y, dtype=float)
    c, d = float(np.min(y)), float(np.max(y))
    if d == c:
        # constant data: keep unit scale so the normalized values are y - c
        return c - 1.0, c + 1.0
    return c, d


def function_informed_selection(N, domain, samples, seed, gamma=DEFAULT_GAMMA) -> GeneratedParams:
    """Slopes from centered differences of the normalized target.

    Parameters
    ----------
    N : int
        Number of neurons.
    domain : (float, float)
        Interval [a, b] the samples live on.
    samples : (x, y) pair of arrays
        Target values; at least ``2N + 1`` finite samples spanning the domain.
        Normalized target values at the centers are obtained by linear
        interpolation of the normalized samples.
    seed : int
    gamma : float
        Proportionality between the difference quotient and the slope.

    Notes
    -----
    With centers ``c_j`` equally spaced by ``dx`` on [-1, 1],

        alpha_j = gamma * (f(c_{j+1}) - f(c_{j-1})) / dx + eps_j

    and at the two end centers the one-sided quotient
    ``2 (f(c_1) - f(c_0)) / dx`` (and its mirror) replaces the centered one.
    ``eps_j`` is uniform on +-(400 + 9N)/200.
    """
    N = _check_n(N)
    a, b = _as_interval(domain)
    x, y = (np.asarray(v, dtype=float).reshape(-1) for v in samples)
    if x.size != y.size:
        raise ValueError("sample abscissae and values differ in length")
    if x.size < 2 * N + 1:
        raise ValueError(f"function-informed selection needs at least {2 * N + 1} samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("samples must be finite")
    order = np.argsort(x, kind="stable")
    xt = normalize_inputs(x[order], (a, b))
    c_lo, c_hi = output_range_of(y)
    yt = (2.0 * y[order] - c_lo - c_hi) / (c_hi - c_lo)

    if N == 1:
        centers = np.array([0.0])
        ft = np.interp([-1.0, 1.0], xt, yt)
        quotient = np.array([ft[1] - ft[0]])
    else:
        centers = np.linspace(-1.0, 1.0, N)
        dx = centers[1] - centers[0]
        ft = np.interp(centers, xt, yt)
        diff = np.empty(N)
        diff[1:-1] = ft[2:] - ft[:-2]
        diff[0] = 2.0 * (ft[1] - ft[0])
        diff[-1] = 2.0 * (ft[-1] - ft[-2])
        quotient = diff / dx

    rng = np.random.default_rng(seed)
    noise = informed_noise_bound(N)
    base = gamma * quotient
    alphas = base + rng.uniform(-noise, noise, N)
    betas = -alphas * centers

    def redraw(j):
        alpha = base[j] + rng.uniform(-noise, noise)
        return alpha, -alpha * centers[j]

    alphas, betas = _redraw_collisions(alphas, betas, redraw)
    return GeneratedParams(alphas, betas, normalized=True)


def generate(strategy: SelectionStrategy, N, domain, samples=None) -> GeneratedParams:
    """Dispatch on ``strategy.kind``."""
    kind = strategy.kind
    if kind is StrategyKind.NAIVE:
        return naive_selection(N, strategy.seed)
    if kind is StrategyKind.FUNCTION_AGNOSTIC:
        return function_agnostic_selection(N, domain, strategy.seed, strategy.centers)
    if samples is None:
        raise ValueError("function-informed selection needs target samples")
    return function_informed_selection(N, domain, samples, strategy.seed, strategy.gamma)

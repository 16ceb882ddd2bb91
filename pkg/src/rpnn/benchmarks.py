"""Target functions used to benchmark the approximators.

Five one-dimensional targets:

* ``f1``: ``arctan(k (x - 4/9))`` on [0, 1], a steep internal front;
* ``f2``: ``log(sin(10 k x) + 2) + sin(k x)`` on [-1, 1], fast oscillations;
* ``f3``: the Cole series solution of the viscous Burgers equation with
  ``u(0, x) = -sin(pi x)`` on [-1, 1];
* ``f4``: ``1 / (1 + eps - x)`` on [-1, 1], a pole just outside the domain;
* ``f5``: ``sin(1 / (x + eps))`` on [0, 1], oscillations piling up near 0.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .core import NumericalError, _as_interval

DEFAULT_EPS = 1.0 / (10.0 * math.pi)
DEFAULT_NU = 0.01 / math.pi


def f1(x, k=10.0):
    x = np.asarray(x, dtype=float)
    return np.arctan(k * (x - 4.0 / 9.0))


def f2(x, k=1.0):
    x = np.asarray(x, dtype=float)
    return np.log(np.sin(10.0 * k * x) + 2.0) + np.sin(k * x)


def f4(x, eps=DEFAULT_EPS):
    x = np.asarray(x, dtype=float)
    if np.any(x >= 1.0 + eps):
        raise ValueError(f"f4 has a pole at x = 1 + eps = {1.0 + eps}; got x beyond it")
    return 1.0 / (1.0 + eps - x)


def f5(x, eps=DEFAULT_EPS):
    x = np.asarray(x, dtype=float)
    if np.any(x + eps == 0.0):
        raise ValueError(f"f5 is singular at x = -eps = {-eps}")
    return np.sin(1.0 / (x + eps))


# --------------------------------------------------------------------------
# modified Bessel functions


def _miller_start(nmax, z, digits) -> int:
    """Starting index for the backward recurrence.

    Beyond ``max(n, z)`` the ratios I_{k+1}/I_k behave like z / (2k); the
    extra margin grows with the square root of the order so that the
    discarded tail is below ``10**-digits`` of the retained values.
    """
    m = max(nmax, z, 1.0)
    return int(m + 2.0 * math.sqrt(digits * m) + digits + 10)


def scaled_bessel_sequence(nmax, z, digits=None):
    """``exp(-z) I_k(z)`` for ``k = 0..nmax`` by Miller's backward recurrence.

    Works for float ``z`` (numpy floats) and for ``mpmath.mpf`` ``z``.  The
    recurrence ``I_{k-1} = (2k/z) I_k + I_{k+1}`` is run downward from a
    large starting index and normalized with ``I_0 + 2 sum_k I_k = e^z``,
    which yields the exponentially scaled values directly.

    Returns a list (floats or mpf, matching ``z``).
    """
    nmax = int(nmax)
    if nmax < 0:
        raise ValueError(f"order must be non-negative, got {nmax}")
    is_mp = isinstance(z, mpmath.mpf)
    if not is_mp:
        z = float(z)
    if z < 0:
        raise ValueError(f"scaled_bessel_i needs z >= 0, got {z}")
    one = mpmath.mpf(1) if is_mp else 1.0
    zero = one * 0
    if z == 0:
        return [one] + [zero] * nmax
    if digits is None:
        digits = mpmath.mp.dps + 5 if is_mp else 18
    start = _miller_start(nmax, float(z), digits)

    vals = [zero] * (nmax + 1)
    i_next, i_cur = zero, one
    total = zero
    two_over_z = 2 / z
    for k in range(start, 0, -1):
        if k <= nmax:
            vals[k] = i_cur
        total += 2 * i_cur
        i_next, i_cur = i_cur, k * two_over_z * i_cur + i_next
        if not is_mp and abs(i_cur) > 1e250:
            # keep the float recurrence inside the exponent range
            i_cur *= 1e-250
            i_next *= 1e-250
            total *= 1e-250
            for j in range(k, nmax + 1):
                vals[j] *= 1e-250
    vals[0] = i_cur
    total += i_cur
    return [v / total for v in vals]


def scaled_bessel_i(n, z):
    """``exp(-z) I_n(z)`` for integer ``n >= 0`` and real ``z >= 0``."""
    if int(n) != n or n < 0:
        raise ValueError(f"order must be a non-negative integer, got {n}")
    return scaled_bessel_sequence(int(n), z)[int(n)]


# --------------------------------------------------------------------------
# Burgers solution


@dataclass(frozen=True)
class BurgersSeriesConfig:
    """Parameters of the Cole series.

    ``truncation_tol`` is relative to the smallest value the (scaled)
    denominator can take, ``exp(-2 z)`` with ``z = 1 / (2 pi nu)``: the
    denominator is the heat-flow evolution of ``exp(-z (1 + cos(pi x)))``
    and never drops below its initial minimum.
    """

    nu: float = DEFAULT_NU
    t: float = 1.0 / math.pi
    truncation_tol: float = 1e-16
    max_terms: int = 500

    def __post_init__(self):
        for name in ("nu", "t", "truncation_tol"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
            object.__setattr__(self, name, v)
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError(f"max_terms must be a positive integer, got {self.max_terms}")
        object.__setattr__(self, "max_terms", int(self.max_terms))

    @property
    def z(self) -> float:
        return 1.0 / (2.0 * math.pi * self.nu)


@dataclass(frozen=True, eq=False)
class _BurgersSeries:
    cfg: BurgersSeriesConfig
    dps: int
    coeffs_mp: tuple  # c_n = (-1)^n e^{-z} I_n(z) e^{-n^2 pi^2 nu t}, n = 0..n_terms
    coeffs: np.ndarray = field(repr=False)
    abs_den: float = 0.0

    @property
    def n_terms(self) -> int:
        return len(self.coeffs_mp) - 1


@functools.lru_cache(maxsize=32)
def _burgers_series(cfg: BurgersSeriesConfig) -> _BurgersSeries:
    z = cfg.z
    # the denominator can be as small as e^{-2z} while its terms are O(1)
    dps = 20 + int(math.ceil(2.0 * z / math.log(10.0)))
    with mpmath.workdps(dps):
        zm = 1 / (2 * mpmath.pi * mpmath.mpf(cfg.nu))
        bessel = scaled_bessel_sequence(cfg.max_terms, zm)
        decay = mpmath.pi ** 2 * mpmath.mpf(cfg.nu) * mpmath.mpf(cfg.t)
        floor = mpmath.mpf(cfg.truncation_tol) * mpmath.exp(-2 * zm)
        coeffs = [bessel[0]]
        for n in range(1, cfg.max_terms + 1):
            c = (-1) ** n * bessel[n] * mpmath.exp(-decay * n * n)
            coeffs.append(c)
            if n * abs(c) < floor:
                break
        else:
            raise NumericalError(
                f"Burgers series not converged after {cfg.max_terms} terms "
                f"(nu={cfg.nu}, t={cfg.t}); raise max_terms")
    cf = np.array([float(c) for c in coeffs])
    cf.setflags(write=False)
    abs_den = float(cf[0] + 2.0 * np.sum(np.abs(cf[1:])))
    return _BurgersSeries(cfg, dps, tuple(coeffs), cf, abs_den)


# a denominator this far below the sum of its term magnitudes has lost
# more than two digits to cancellation in double precision
_CANCELLATION = 1e-2


def _burgers_double(series: _BurgersSeries, x):
    n = np.arange(1, series.n_terms + 1)
    c = series.coeffs[1:]
    theta = np.pi * np.outer(x, n)
    num = np.sin(theta) @ (n * c)
    den = series.coeffs[0] + 2.0 * (np.cos(theta) @ c)
    return num, den


def _burgers_fixed_point(series: _BurgersSeries, x):
    """Numerator and denominator in fixed-point integer arithmetic.

    Values are Python integers scaled by ``2**bits``; ``cos(n pi x)`` and
    ``sin(n pi x)`` follow the Chebyshev recurrence, vectorized over the
    points with object arrays.  Both results carry the scale ``2**(2 bits)``.
    """
    bits = int(math.ceil((series.dps + 10) * math.log2(10.0))) + 16
    one = 1 << bits
    with mpmath.workdps(series.dps + 15):
        coeffs = [int(mpmath.nint(c * one)) for c in series.coeffs_mp]
        angles = [mpmath.pi * mpmath.mpf(float(v)) for v in x]
        c1 = np.array([int(mpmath.nint(mpmath.cos(a) * one)) for a in angles], dtype=object)
        s1 = np.array([int(mpmath.nint(mpmath.sin(a) * one)) for a in angles], dtype=object)
    two_c1 = 2 * c1
    cos_prev = np.full(len(x), one, dtype=object)
    sin_prev = np.zeros(len(x), dtype=object)
    cos_cur, sin_cur = c1, s1
    num = np.zeros(len(x), dtype=object)
    den = np.zeros(len(x), dtype=object)
    for k in range(1, len(coeffs)):
        num += (k * coeffs[k]) * sin_cur
        den += coeffs[k] * cos_cur
        cos_prev, cos_cur = cos_cur, ((two_c1 * cos_cur) >> bits) - cos_prev
        sin_prev, sin_cur = sin_cur, ((two_c1 * sin_cur) >> bits) - sin_prev
    den = coeffs[0] * one + 2 * den
    return num, den, 2 * bits


def f3(x, t=1.0 / math.pi, cfg: BurgersSeriesConfig | None = None):
    """Cole series solution of ``u_t = nu u_xx - u u_x``, ``u(0, x) = -sin(pi x)``.

    ``u = 4 pi nu (sum_n n a_n E_n sin(n pi x)) / (a_0 + 2 sum_n a_n E_n cos(n pi x))``
    with ``a_n = (-1)^n I_n(1 / (2 pi nu))`` and ``E_n = exp(-n^2 pi^2 nu t)``.
    Both sums use ``exp(-z) I_n(z)``; the common factor cancels.

    Points where the double precision denominator suffers cancellation
    (around the shock at x = 0) are re-evaluated in fixed-point integer arithmetic
    carrying enough digits to absorb the cancellation.

    Parameters
    ----------
    x : array_like
    t : float
        Time; ignored when ``cfg`` is given.
    cfg : BurgersSeriesConfig, optional
    """
    if cfg is None:
        cfg = BurgersSeriesConfig(t=t)
    series = _burgers_series(cfg)
    xs = np.asarray(x, dtype=float)
    flat = xs.reshape(-1)
    if not np.all(np.isfinite(flat)):
        raise ValueError("f3 needs finite x")
    num, den = _burgers_double(series, flat)
    scale = 4.0 * math.pi * cfg.nu
    out = np.empty_like(flat)
    good = np.abs(den) >= _CANCELLATION * series.abs_den
    out[good] = scale * num[good] / den[good]
    bad = np.flatnonzero(~good)
    if bad.size:
        num_i, den_i, shift = _burgers_fixed_point(series, flat[bad])
        small = [i for i, d in zip(bad, den_i)
                 if abs(mpmath.ldexp(mpmath.mpf(d), -shift)) < 1e-300]
        if small:
            raise NumericalError(
                f"Burgers denominator below 1e-300 at x={flat[small[0]]}; "
                "the series is not usable at this viscosity")
        # int / int is correctly rounded, whatever the sizes
        out[bad] = [scale * (n / d) for n, d in zip(num_i, den_i)]
    return out.reshape(xs.shape)


# --------------------------------------------------------------------------
# registry


BENCHMARK_IDS = ("f1", "f2", "f3", "f4", "f5")


@dataclass(frozen=True)
class BenchmarkFunction:
    """A target function with its parameters and domain."""

    id: str
    params: tuple = ()
    domain: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.id not in BENCHMARK_IDS:
            raise ValueError(f"unknown function {self.id!r}; choose one of {', '.join(BENCHMARK_IDS)}")
        object.__setattr__(self, "domain", _as_interval(self.domain))
        object.__setattr__(self, "params", tuple(sorted(dict(self.params).items())))

    @property
    def kwargs(self) -> dict:
        return dict(self.params)

    def __call__(self, x):
        p = self.kwargs
        if self.id == "f1":
            return f1(x, p["k"])
        if self.id == "f2":
            return f2(x, p["k"])
        if self.id == "f3":
            return f3(x, cfg=BurgersSeriesConfig(nu=p["nu"], t=p["t"]))
        if self.id == "f4":
            return f4(x, p["eps"])
        return f5(x, p["eps"])

    def label(self) -> str:
        body = ",".join(f"{k}={v:.6g}" for k, v in self.params)
        return f"{self.id}({body})"


def get_benchmark(fid, k=None, t=None, eps=None, nu=None) -> BenchmarkFunction:
    """Build a benchmark with its default parameters and domain.

    Defaults: ``k=10`` for f1, ``k=1`` for f2, ``t=1/pi`` and
    ``nu=0.01/pi`` for f3, ``eps=1/(10 pi)`` for f4 and f5.
    """
    fid = str(fid).lower()
    if fid == "f1":
        return BenchmarkFunction("f1", {"k": 10.0 if k is None else float(k)}, (0.0, 1.0))
    if fid == "f2":
        return BenchmarkFunction("f2", {"k": 1.0 if k is None else float(k)}, (-1.0, 1.0))
    if fid == "f3":
        return BenchmarkFunction(
            "f3", {"t": 1.0 / math.pi if t is None else float(t),
                   "nu": DEFAULT_NU if nu is None else float(nu)}, (-1.0, 1.0))
    if fid == "f4":
        return BenchmarkFunction("f4", {"eps": DEFAULT_EPS if eps is None else float(eps)}, (-1.0, 1.0))
    if fid == "f5":
        return BenchmarkFunction("f5", {"eps": DEFAULT_EPS if eps is None else float(eps)}, (0.0, 1.0))
    raise ValueError(f"unknown function {fid!r}; choose one of {', '.join(BENCHMARK_IDS)}")

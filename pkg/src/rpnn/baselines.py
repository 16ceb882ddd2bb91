"""Classical comparators: Legendre-grid polynomial interpolation and cubic splines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import _as_interval, denormalize_inputs


def _legendre_and_derivative(n, x):
    """P_n(x) and P_n'(x) by the three-term recurrence (n >= 1)."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def legendre_nodes(N, tol=1e-15, max_iter=100) -> np.ndarray:
    """The N+1 roots of the Legendre polynomial P_{N+1}, ascending.

    Newton's method started from the Chebyshev points of the first kind.
    """
    if int(N) != N or N < 0:
        raise ValueError(f"N must be a non-negative integer, got {N}")
    n = int(N) + 1
    k = np.arange(n)
    x = -np.cos((2 * k + 1) * np.pi / (2 * n))
    for _ in range(max_iter):
        p, dp = _legendre_and_derivative(n, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= tol:
            break
    else:  # pragma: no cover - Newton converges quadratically from these guesses
        raise RuntimeError(f"Newton iteration for P_{n} roots did not converge")
    # enforce exact symmetry of the grid
    x = 0.5 * (x - x[::-1])
    if n % 2:
        x[n // 2] = 0.0
    return x


@dataclass(frozen=True, eq=False)
class BarycentricInterpolant:
    nodes: np.ndarray
    values: np.ndarray
    bary_weights: np.ndarray

    def __call__(self, x):
        return barycentric_eval(self, x)


def barycentric_weights(nodes) -> np.ndarray:
    """Weights 1 / prod_{k != j}(x_j - x_k), rescaled so the largest is 1.

    Products are accumulated in log space so hundreds of nodes do not
    overflow or underflow.
    """
    x = np.asarray(nodes, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise ValueError("interpolation nodes must be distinct")
    sign = np.prod(np.sign(diff), axis=1)
    logmag = -np.sum(np.log(np.abs(diff)), axis=1)
    return sign * np.exp(logmag - logmag.max())


def barycentric_fit(nodes, values) -> BarycentricInterpolant:
    x = np.array(nodes, dtype=float, copy=True).reshape(-1)
    y = np.array(values, dtype=float, copy=True).reshape(-1)
    if x.size != y.size or x.size == 0:
        raise ValueError("need as many values as nodes, and at least one node")
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    w = barycentric_weights(x)
    for arr in (x, y, w):
        arr.setflags(write=False)
    return BarycentricInterpolant(x, y, w)


def barycentric_eval(interp: BarycentricInterpolant, x):
    """Second (true) barycentric formula; returns stored values exactly at nodes."""
    xs = np.asarray(x, dtype=float)
    flat = xs.reshape(-1)
    if not np.all(np.isfinite(flat)):
        raise ValueError("cannot evaluate the interpolant at non-finite x")
    diff = flat[:, None] - interp.nodes[None, :]
    hit_row, hit_col = np.nonzero(diff == 0.0)
    diff[hit_row, :] = 1.0
    c = interp.bary_weights / diff
    out = (c @ interp.values) / c.sum(axis=1)
    out[hit_row] = interp.values[hit_col]
    return out.reshape(xs.shape)


def legendre_interpolant(f, N, interval=(-1.0, 1.0)) -> BarycentricInterpolant:
    """Interpolate ``f`` on the N+1 Legendre nodes mapped onto ``interval``."""
    a, b = _as_interval(interval)
    nodes = denormalize_inputs(legendre_nodes(N), (a, b))
    return barycentric_fit(nodes, f(nodes))


# --------------------------------------------------------------------------
# cubic splines


@dataclass(frozen=True, eq=False)
class CubicSpline:
    """Piecewise cubic ``s(x) = c0 + c1 t + c2 t^2 + c3 t^3`` with ``t = x - knots[i]``.

    ``coeffs`` has shape (len(knots) - 1, 4), lowest degree first.
    """

    knots: np.ndarray
    coeffs: np.ndarray

    def __call__(self, x):
        return spline_eval(self, x)


def _thomas(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = diag.size
    c = np.zeros(n)
    d = np.zeros(n)
    c[0] = upper[0] / diag[0] if n > 1 else 0.0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / denom if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom
    x = np.zeros(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def spline_fit(knots, values) -> CubicSpline:
    """Interpolating cubic spline with not-a-knot end conditions.

    The third derivative is continuous at the second and the penultimate
    knot.  The second derivatives ``M_i`` at the knots solve the usual
    moment equations; the two end conditions are used to eliminate ``M_0``
    and ``M_{n-1}``, which leaves a tridiagonal system for the interior
    moments.
    """
    x = np.array(knots, dtype=float, copy=True).reshape(-1)
    y = np.array(values, dtype=float, copy=True).reshape(-1)
    n = x.size
    if y.size != n:
        raise ValueError("need one value per knot")
    if n < 4:
        raise ValueError(f"a not-a-knot spline needs at least 4 knots, got {n}")
    h = np.diff(x)
    if np.any(h <= 0):
        raise ValueError("knots must be strictly increasing")
    slopes = np.diff(y) / h
    rhs = 6.0 * np.diff(slopes)  # rows i = 1..n-2

    m = n - 2
    lower = h[:-1].copy()
    diag = 2.0 * (h[:-1] + h[1:])
    upper = h[1:].copy()
    # M_0 = ((h0 + h1) M_1 - h0 M_2) / h1
    h0, h1 = h[0], h[1]
    diag[0] += lower[0] * (h0 + h1) / h1
    if m > 1:
        upper[0] -= lower[0] * h0 / h1
    # M_{n-1} = ((hl + hk) M_{n-2} - hl M_{n-3}) / hk  with hk = h[-2], hl = h[-1]
    hk, hl = h[-2], h[-1]
    if m > 1:
        diag[-1] += upper[-1] * (hk + hl) / hk
        lower[-1] -= upper[-1] * hl / hk
        interior = _thomas(lower, diag, upper, rhs)
    else:  # pragma: no cover - m >= 2 because n >= 4
        interior = rhs / diag
    M = np.empty(n)
    M[1:-1] = interior
    M[0] = ((h0 + h1) * M[1] - h0 * M[2]) / h1
    M[-1] = ((hk + hl) * M[-2] - hl * M[-3]) / hk

    coeffs = np.empty((n - 1, 4))
    coeffs[:, 0] = y[:-1]
    coeffs[:, 1] = slopes - h * (2.0 * M[:-1] + M[1:]) / 6.0
    coeffs[:, 2] = 0.5 * M[:-1]
    coeffs[:, 3] = (M[1:] - M[:-1]) / (6.0 * h)
    x.setflags(write=False)
    coeffs.setflags(write=False)
    return CubicSpline(x, coeffs)


def spline_eval(s: CubicSpline, x, return_flags=False):
    """Evaluate the spline; points outside the knots use the boundary cubics.

    With ``return_flags=True`` also returns a boolean mask marking the
    extrapolated points.
    """
    xs = np.asarray(x, dtype=float)
    flat = xs.reshape(-1)
    if not np.all(np.isfinite(flat)):
        raise ValueError("cannot evaluate the spline at non-finite x")
    idx = np.clip(np.searchsorted(s.knots, flat, side="right") - 1, 0, s.coeffs.shape[0] - 1)
    t = flat - s.knots[idx]
    c = s.coeffs[idx]
    out = (c[:, 0] + t * (c[:, 1] + t * (c[:, 2] + t * c[:, 3]))).reshape(xs.shape)
    if return_flags:
        outside = ((flat < s.knots[0]) | (flat > s.knots[-1])).reshape(xs.shape)
        return out, outside
    return out


def spline_interpolant(f, N, interval) -> CubicSpline:
    """Not-a-knot spline through ``N`` equispaced knots on ``interval``."""
    a, b = _as_interval(interval)
    knots = np.linspace(a, b, int(N))
    return spline_fit(knots, f(knots))

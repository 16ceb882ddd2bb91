"""Minimum-norm least squares for rank-deficient collocation systems.

Two routes solve ``R w = y`` in the least squares sense:

* truncated SVD, keeping singular values above an absolute tolerance;
* complete orthogonal decomposition (COD): a column-pivoted Householder QR
  that reveals the numerical rank ``r``, followed by a second Householder QR
  of the leading ``r`` rows of the triangular factor, so that
  ``R = Q1 L S^T`` with ``L`` lower triangular.  The minimum-norm solution is
  ``S L^{-1} Q1^T y``, with ``L^{-1}`` applied by forward substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

RANK_RULES = ("relative", "absolute")
METHODS = ("svd", "cod")


@dataclass(frozen=True, eq=False)
class LeastSquaresSolution:
    """Result of a least squares solve.

    ``wtilde`` holds the offset first, then the readout weights.  An
    ``effective_rank`` of zero means every singular value / pivot fell below
    the tolerance and the zero vector was returned.
    """

    wtilde: np.ndarray
    residual_norm: float
    effective_rank: int
    method: str
    tolerance: float
    rank_rule: str = "absolute"

    @property
    def offset(self) -> float:
        return float(self.wtilde[0])

    @property
    def weights(self) -> np.ndarray:
        return self.wtilde[1:]

    @property
    def degenerate(self) -> bool:
        return self.effective_rank == 0


def _matrix(R) -> np.ndarray:
    entries = getattr(R, "entries", R)
    A = np.asarray(entries, dtype=float)
    if A.ndim != 2 or 0 in A.shape:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    return A


def _check_system(R, y, tol):
    A = _matrix(R)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != A.shape[0]:
        raise ValueError(f"right-hand side has {y.size} entries but the matrix has {A.shape[0]} rows")
    if not (tol > 0 and math.isfinite(tol)):
        raise ValueError(f"tolerance must be positive and finite, got {tol}")
    return A, y


def default_tolerance(R, n) -> float:
    """Rank tolerance ``n * ulp(||R||_2) / 1000``.

    ``ulp(x)`` is the gap between ``x`` and the next larger double, so
    ``ulp(1) = 2.22e-16``.  ``n`` is the number of data points.
    """
    if n == 0:
        return 0.0
    norm2 = float(np.linalg.norm(_matrix(R), 2))
    return n * float(np.spacing(norm2)) / 1000.0


def _residual(A, w, y) -> float:
    return float(np.linalg.norm(A @ w - y))


# --------------------------------------------------------------------------
# truncated SVD


@dataclass(frozen=True, eq=False)
class SVD:
    U: np.ndarray
    s: np.ndarray
    Vt: np.ndarray


def svd(R) -> SVD:
    U, s, Vt = np.linalg.svd(_matrix(R), full_matrices=False)
    return SVD(U, s, Vt)


def tsvd_solve(R, y, tol, decomposition: SVD | None = None) -> LeastSquaresSolution:
    """Pseudo-inverse solution keeping singular values strictly above ``tol``.

    A precomputed :class:`SVD` of the same matrix may be passed to try several
    tolerances without refactorizing.
    """
    A, y = _check_system(R, y, tol)
    dec = decomposition if decomposition is not None else svd(A)
    q = int(np.count_nonzero(dec.s > tol))
    if q == 0:
        w = np.zeros(A.shape[1])
    else:
        w = dec.Vt[:q].T @ ((dec.U[:, :q].T @ y) / dec.s[:q])
    return LeastSquaresSolution(w, _residual(A, w, y), q, "svd", float(tol), "absolute")


# --------------------------------------------------------------------------
# Householder helpers


def _householder(x):
    """Reflector ``H = I - beta v v^T`` with ``H x = alpha e_1``."""
    normx = float(np.linalg.norm(x))
    v = np.array(x, dtype=float, copy=True)
    if normx == 0.0:
        return v, 0.0, 0.0
    alpha = -math.copysign(normx, v[0])
    v[0] -= alpha
    return v, 2.0 / float(v @ v), alpha


def _householder_factor(A):
    """In-place style Householder QR; returns (upper triangle, reflectors)."""
    A = np.array(A, dtype=float, copy=True)
    m, n = A.shape
    if m < n:
        raise ValueError("householder QR expects at least as many rows as columns")
    reflectors = []
    for k in range(n):
        v, beta, alpha = _householder(A[k:, k])
        if beta:
            A[k:, k + 1:] -= beta * np.outer(v, v @ A[k:, k + 1:])
        A[k, k] = alpha
        A[k + 1:, k] = 0.0
        reflectors.append((v, beta))
    return np.triu(A[:n]), reflectors


def _apply_q(reflectors, x):
    """Multiply ``H_1 ... H_k x`` for a vector or matrix ``x``."""
    x = np.array(x, dtype=float, copy=True)
    for k in range(len(reflectors) - 1, -1, -1):
        v, beta = reflectors[k]
        if beta:
            if x.ndim == 1:
                x[k:] -= beta * v * float(v @ x[k:])
            else:
                x[k:] -= beta * np.outer(v, v @ x[k:])
    return x


def householder_qr(A):
    """Unpivoted Householder QR of a tall matrix ``A`` (m x n, m >= n).

    Returns the m x n orthonormal factor and the n x n upper triangle.
    """
    U, reflectors = _householder_factor(A)
    m, n = np.shape(A)
    return _apply_q(reflectors, np.eye(m, n)), U


def forward_substitution(L, b):
    """Solve ``L x = b`` for lower triangular ``L`` row by row."""
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    n = b.size
    x = np.zeros(n)
    for i in range(n):
        x[i] = (b[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


# --------------------------------------------------------------------------
# rank-revealing QR and COD


def _threshold(diag, tol, rank_rule) -> float:
    if rank_rule not in RANK_RULES:
        raise ValueError(f"rank_rule must be one of {RANK_RULES}, got {rank_rule!r}")
    if rank_rule == "absolute":
        return tol
    return tol * (float(diag[0]) if diag.size else 0.0)


def _rank_from_diag(diag, thr) -> int:
    below = np.flatnonzero(diag <= thr)
    return int(below[0]) if below.size else int(diag.size)


@dataclass(frozen=True, eq=False)
class RRQR:
    """Column-pivoted QR ``R[:, perm] = Q @ T`` with a numerical rank.

    ``T`` has the trailing block (rows and columns past ``rank``) zeroed.
    The untruncated factor is kept so that :meth:`truncated` can re-rank the
    same factorization under another tolerance.
    """

    perm: np.ndarray
    rank: int
    tolerance: float
    rank_rule: str
    diag: np.ndarray
    shape: tuple
    _T_full: np.ndarray = field(repr=False)
    _reflectors: tuple = field(repr=False)
    _Q0: np.ndarray | None = field(repr=False, default=None)

    @property
    def T(self) -> np.ndarray:
        T = self._T_full.copy()
        T[self.rank:, self.rank:] = 0.0
        return T

    @property
    def P(self) -> np.ndarray:
        n = self.perm.size
        P = np.zeros((n, n))
        P[self.perm, np.arange(n)] = 1.0
        return P

    def apply_qt(self, y) -> np.ndarray:
        """``Q^T y`` without forming ``Q``."""
        z = np.array(y, dtype=float, copy=True)
        if self._Q0 is not None:
            z = self._Q0.T @ z
        for k, (v, beta) in enumerate(self._reflectors):
            if beta:
                z[k:] -= beta * v * float(v @ z[k:])
        return z[: self._T_full.shape[0]]

    @property
    def Q(self) -> np.ndarray:
        rows = self._T_full.shape[0] if self._Q0 is not None else self.shape[0]
        kmax = self._T_full.shape[0]
        Q = _apply_q(self._reflectors, np.eye(rows, kmax))
        if self._Q0 is not None:
            Q = self._Q0 @ Q
        return Q

    def truncated(self, tol, rank_rule=None) -> "RRQR":
        rule = self.rank_rule if rank_rule is None else rank_rule
        if not (tol > 0 and math.isfinite(tol)):
            raise ValueError(f"tolerance must be positive and finite, got {tol}")
        rank = _rank_from_diag(self.diag, _threshold(self.diag, tol, rule))
        return replace(self, rank=rank, tolerance=float(tol), rank_rule=rule)


def rrqr_decompose(R, tol, rank_rule="relative") -> RRQR:
    """Householder QR with column pivoting by largest remaining column norm.

    Column norms are downdated after each step and recomputed from scratch
    when cancellation makes the downdated value unreliable.  Matrices with
    more rows than columns are first reduced by an unpivoted QR; this leaves
    column norms and inner products, hence the pivot order, unchanged.

    The numerical rank ``r`` is the number of leading diagonal entries with
    ``|T_kk| > thr``, where ``thr = tol * |T_00|`` for the ``"relative"`` rule
    and ``thr = tol`` for the ``"absolute"`` rule.
    """
    A0 = _matrix(R)
    if not (tol > 0 and math.isfinite(tol)):
        raise ValueError(f"tolerance must be positive and finite, got {tol}")
    m, n = A0.shape
    Q0 = None
    if m > n:
        Q0, A = np.linalg.qr(A0)
    else:
        A = np.array(A0, copy=True)
    rows = A.shape[0]
    kmax = min(rows, n)
    perm = np.arange(n)
    norms = np.linalg.norm(A, axis=0)
    ref = norms.copy()
    tol3z = math.sqrt(np.finfo(float).eps)
    reflectors = []
    for k in range(kmax):
        p = k + int(np.argmax(norms[k:]))
        if p != k:
            A[:, [k, p]] = A[:, [p, k]]
            perm[[k, p]] = perm[[p, k]]
            norms[[k, p]] = norms[[p, k]]
            ref[[k, p]] = ref[[p, k]]
        v, beta, alpha = _householder(A[k:, k])
        if beta:
            A[k:, k + 1:] -= beta * np.outer(v, v @ A[k:, k + 1:])
        A[k, k] = alpha
        A[k + 1:, k] = 0.0
        reflectors.append((v, beta))
        if k + 1 < n:
            rest = slice(k + 1, n)
            nz = norms[rest] != 0
            ratio = np.zeros(n - k - 1)
            ratio[nz] = np.abs(A[k, rest][nz]) / norms[rest][nz]
            temp = np.maximum(0.0, (1.0 + ratio) * (1.0 - ratio))
            with np.errstate(divide="ignore", invalid="ignore"):
                temp2 = np.where(ref[rest] != 0, temp * (norms[rest] / ref[rest]) ** 2, 0.0)
            stale = nz & (temp2 <= tol3z)
            updated = norms[rest] * np.sqrt(temp)
            if np.any(stale):
                cols = np.flatnonzero(stale) + k + 1
                fresh = np.linalg.norm(A[k + 1:, cols], axis=0) if k + 1 < rows else np.zeros(cols.size)
                updated[stale] = fresh
                ref[cols] = fresh
            norms[rest] = updated
    T_full = np.triu(A[:kmax])
    diag = np.abs(np.diag(T_full))
    rank = _rank_from_diag(diag, _threshold(diag, tol, rank_rule))
    return RRQR(perm, rank, float(tol), rank_rule, diag, (m, n), T_full, tuple(reflectors), Q0)


def cod_solve(R, y, tol, rank_rule="relative", decomposition: RRQR | None = None) -> LeastSquaresSolution:
    """Minimum-norm least squares solution through a complete orthogonal decomposition.

    Parameters
    ----------
    R : array_like or DesignMatrix
    y : array_like
    tol : float
        Rank tolerance, interpreted according to ``rank_rule``.
    rank_rule : {"relative", "absolute"}
    decomposition : RRQR, optional
        A column-pivoted QR of ``R`` computed earlier; it is re-ranked with
        ``tol`` instead of being recomputed.
    """
    A, y = _check_system(R, y, tol)
    if decomposition is None:
        rrqr = rrqr_decompose(A, tol, rank_rule)
    else:
        rrqr = decomposition.truncated(tol, rank_rule)
    n = A.shape[1]
    r = rrqr.rank
    if r == 0:
        w = np.zeros(n)
        return LeastSquaresSolution(w, _residual(A, w, y), 0, "cod", float(tol), rank_rule)
    T1 = rrqr.T[:r, :]
    # T1^T = V U  =>  R P = Q1 U^T V^T with U^T lower triangular
    U, reflectors = _householder_factor(T1.T)
    c = rrqr.apply_qt(y)[:r]
    z = forward_substitution(U.T, c)
    padded = np.zeros(n)
    padded[:r] = z
    w = np.empty(n)
    w[rrqr.perm] = _apply_q(reflectors, padded)
    return LeastSquaresSolution(w, _residual(A, w, y), r, "cod", float(tol), rank_rule)


def solve(R, y, method="cod", tol=None, rank_rule="relative", n_points=None) -> LeastSquaresSolution:
    """Solve with ``method`` in {"svd", "cod"}; ``tol=None`` uses :func:`default_tolerance`."""
    A = _matrix(R)
    if tol is None:
        tol = default_tolerance(A, A.shape[0] if n_points is None else n_points)
    if method in ("svd", "tsvd"):
        return tsvd_solve(A, y, tol)
    if method == "cod":
        return cod_solve(A, y, tol, rank_rule)
    raise ValueError(f"unknown solver {method!r}; choose svd or cod")

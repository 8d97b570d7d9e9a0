"""Dense real linear algebra kernels.

Matrices are 2-D float64 numpy arrays throughout; vectors are 1-D. The
functions here are thin, contract-checked fronts over LAPACK/BLAS (via numpy
and scipy) plus two test-scale reference routines, ``pinv_oracle`` and
``numerical_rank``. On-disk exchange is column-major (see ``lrlsq.mio``);
in-memory stride order is whatever numpy produces.

All operations are pure: inputs are never modified, results are fresh
arrays. They are therefore safe to call concurrently on shared read-only
data. Results are deterministic for a fixed BLAS build and thread count.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, RankDeficient, SingularCapacitance, SingularMatrix

EPS = float(np.finfo(np.float64).eps)


class QRFactors(NamedTuple):
    """Thin QR factorization a = q @ r.

    q has orthonormal columns (m x n) and r is upper triangular (n x n) with
    a nonnegative diagonal. For the sizes this package targets, q satisfies
    ||q.T @ q - I||_F <= 1e-12 * n and ||q @ r - a||_F <= 1e-12 * ||a||_F.
    """

    q: np.ndarray
    r: np.ndarray


def _as_2d(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-D matrix, got ndim={a.ndim}")
    return a


def mat_mul(a, b, transpose_a: bool = False) -> np.ndarray:
    """Matrix product ``a @ b``, or ``a.T @ b`` when ``transpose_a`` is set.

    A dimension-checked front over BLAS gemm; exists so callers have one
    entry point that turns shape bugs into DimensionMismatch instead of a
    numpy broadcast surprise.
    """
    a = _as_2d(a, "a")
    b = _as_2d(b, "b")
    inner = a.shape[0] if transpose_a else a.shape[1]
    if inner != b.shape[0]:
        op = "a.T @ b" if transpose_a else "a @ b"
        raise DimensionMismatch(
            f"cannot form {op} with shapes {a.shape} and {b.shape}"
        )
    return (a.T if transpose_a else a) @ b


def qr_thin(a, rank_tol: float | None = None) -> QRFactors:
    """Thin Householder QR of a tall full-column-rank matrix.

    Signs are normalized so every diagonal entry of r is nonnegative, which
    makes factors reproducible across LAPACK builds.

    Parameters
    ----------
    a : (m, n) array, m >= n
    rank_tol : float, optional
        Relative rank-detection threshold. The factorization is rejected
        when some ``|r[i, i]| <= rank_tol * max_j |r[j, j]|``. Defaults to
        ``m * eps``, the usual backward-stable choice.

    Raises
    ------
    RankDeficient
        If a is numerically rank-deficient by the test above.
    DimensionMismatch
        If a is not 2-D or has m < n.
    """
    a = _as_2d(a, "a")
    m, n = a.shape
    if m < n:
        raise DimensionMismatch(f"qr_thin requires m >= n, got shape {a.shape}")
    q, r = np.linalg.qr(a, mode="reduced")
    sign = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q = q * sign
    r = r * sign[:, None]
    diag = np.abs(np.diag(r))
    if rank_tol is None:
        rank_tol = m * EPS
    if n > 0 and diag.min() <= rank_tol * diag.max():
        raise RankDeficient(
            f"matrix of shape {a.shape} is numerically rank-deficient "
            f"(min |R_ii| = {diag.min():.3e}, max = {diag.max():.3e})"
        )
    return QRFactors(q=q, r=r)


def solve_upper_triangular(r, b, transpose: bool = False) -> np.ndarray:
    """Solve ``r @ x = b`` (or ``r.T @ x = b``) for upper-triangular r.

    Back substitution via BLAS trsm; the transpose flag switches to forward
    substitution on r.T. b may be a vector or a matrix of stacked
    right-hand-side columns; the result has the same ndim.

    Raises SingularMatrix if r has a zero diagonal entry. Near-zero
    diagonals are the caller's concern (``qr_thin`` screens for them).
    """
    r = _as_2d(r, "r")
    n = r.shape[0]
    if r.shape[1] != n:
        raise DimensionMismatch(f"r must be square, got shape {r.shape}")
    b = np.asarray(b, dtype=np.float64)
    if b.ndim not in (1, 2) or b.shape[0] != n:
        raise DimensionMismatch(
            f"right-hand side of shape {b.shape} does not conform with r of shape {r.shape}"
        )
    if n > 0 and np.any(np.diag(r) == 0.0):
        raise SingularMatrix("triangular factor has a zero diagonal entry")
    return scipy.linalg.solve_triangular(
        r, b, trans="T" if transpose else "N", lower=False, check_finite=False
    )


def lu_factor_checked(c, pivot_tol: float | None = None):
    """LU-factor a small square matrix and estimate its conditioning.

    Returns ``(factors, rcond)`` where ``factors`` feeds ``lu_apply`` and
    ``rcond`` is a 1-norm reciprocal condition estimate in (0, 1].

    Raises SingularCapacitance when the smallest pivot falls at or below
    ``pivot_tol * max|c|`` (default ``p * eps``): the system cannot be
    solved reliably.
    """
    c = _as_2d(c, "c")
    p = c.shape[0]
    if c.shape[1] != p:
        raise DimensionMismatch(f"c must be square, got shape {c.shape}")
    if p == 0:
        raise DimensionMismatch("c must be nonempty")
    if pivot_tol is None:
        pivot_tol = p * EPS
    cmax = float(np.abs(c).max())
    anorm = float(np.abs(c).sum(axis=0).max())
    with warnings.catch_warnings():
        # Exact singularity is our own error condition, reported below.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(c, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= pivot_tol * cmax:
        raise SingularCapacitance(
            f"{p} x {p} system is singular or near-singular "
            f"(min pivot {pivots.min():.3e}, max entry {cmax:.3e})"
        )
    rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    if info != 0:  # pragma: no cover - dgecon only fails on bad arguments
        raise SingularCapacitance("condition estimation failed")
    return (lu, piv), float(rcond)


def lu_apply(factors, b) -> np.ndarray:
    """Solve against a factorization from ``lu_factor_checked``."""
    lu, piv = factors
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != lu.shape[0]:
        raise DimensionMismatch(
            f"right-hand side of shape {b.shape} does not conform with "
            f"factored system of order {lu.shape[0]}"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def lu_solve(c, b, pivot_tol: float | None = None):
    """Solve the small square system ``c @ x = b`` with partial pivoting.

    Returns ``(x, rcond)``; rcond is the reciprocal condition estimate of c,
    reported as a diagnostic. See ``lu_factor_checked`` for the singularity
    contract.
    """
    factors, rcond = lu_factor_checked(c, pivot_tol)
    return lu_apply(factors, b), rcond


def pinv_oracle(a, rank_tol: float | None = None) -> np.ndarray:
    """Explicit pseudoinverse of a tall full-column-rank matrix.

    Computed as R^{-1} Q.T from the thin QR factors, which is the unique
    Moore-Penrose pseudoinverse for full column rank. Materializes an n x m
    matrix, so this is a test-scale reference, not a solver building block.
    """
    f = qr_thin(a, rank_tol)
    return solve_upper_triangular(f.r, f.q.T)


def numerical_rank(a, tol: float) -> int:
    """Number of singular values exceeding ``tol`` times the largest one."""
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    a = _as_2d(a, "a")
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))

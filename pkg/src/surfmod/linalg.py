"""Norms of rectangular matrices and the companion-block factorization.

The central quantity is the generalized absolute determinant of a
rectangular matrix: for a tall n x m matrix A (n >= m) it equals
sqrt(det(A^T A)), which by the Cauchy-Binet identity is the square root
of the sum of the squared determinants of all maximal (m x m) minors.
For square matrices it reduces to |det A|, and for wide matrices the
transposed convention sqrt(det(A A^T)) is used.

This norm measures how the matrix scales m-dimensional volume, which is
exactly the area-distortion factor of a parametrized surface patch.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrix

__all__ = [
    "RCOND_THRESHOLD",
    "generalized_norm",
    "companion_block",
    "verify_factorization",
]

# Reciprocal condition number below which a matrix is treated as singular.
RCOND_THRESHOLD = 1e-12


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def generalized_norm(a) -> float:
    """Volume-scaling norm of a rectangular matrix.

    Parameters
    ----------
    a : array_like
        Matrix of shape (n, m).  Any of tall, square, or wide is accepted;
        wide matrices are handled through their transpose.

    Returns
    -------
    float
        sqrt(det(A^T A)) for tall or square A, sqrt(det(A A^T)) for wide A.
        Equal to |det A| in the square case.

    Notes
    -----
    Computed from a QR factorization as the absolute product of the
    diagonal of R, which evaluates sqrt(det(A^T A)) without ever forming
    the Gram matrix.  Rank-deficient input yields 0.0 rather than an
    error.
    """
    a = _as_matrix(a)
    if a.shape[1] > a.shape[0]:
        a = a.T
    r = np.linalg.qr(a, mode="r")
    return float(abs(np.prod(np.diag(r))))


def companion_block(a, m: int, rcond_threshold: float = RCOND_THRESHOLD) -> np.ndarray:
    """First n-m rows of the inverse of a square matrix.

    For invertible A of size n x n, the returned (n-m) x n block B
    satisfies B A = (I_{n-m} | 0).  Geometrically B annihilates the last
    m columns of A and acts as the identity on the first n-m.

    Parameters
    ----------
    a : array_like
        Square invertible matrix, shape (n, n).
    m : int
        Number of trailing columns to annihilate, 1 <= m <= n-1.
    rcond_threshold : float, optional
        Matrices whose reciprocal condition number falls below this are
        rejected as singular.

    Raises
    ------
    SingularMatrix
        If the reciprocal condition number of ``a`` is below threshold.
    ValueError
        If ``a`` is not square or ``m`` is out of range.
    """
    a = _as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must satisfy 1 <= m <= n-1, got m={m} for n={n}")
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or 1.0 / cond < rcond_threshold:
        raise SingularMatrix(
            f"reciprocal condition number {0.0 if not np.isfinite(cond) else 1.0 / cond:.3e} "
            f"below {rcond_threshold:.1e}"
        )
    # Solve A^T X = E for the first n-m columns E of the identity; the
    # transpose of X is the desired row block of A^{-1}.
    rhs = np.eye(n)[:, : n - m]
    return np.linalg.solve(a.T, rhs).T


def verify_factorization(a, m: int) -> tuple[float, float]:
    """Evaluate both sides of the companion-block norm identity.

    For invertible A, the norm of its last m columns factors as the
    absolute determinant of A times the norm of the companion block:
    |A'| = |det A| * |B|.  This function returns the two sides so callers
    can compare them at whatever tolerance the context demands.

    Returns
    -------
    (lhs, rhs) : tuple of float
        lhs is the generalized norm of the last m columns of ``a``;
        rhs is generalized_norm(a) * generalized_norm(companion_block(a, m)).
    """
    a = _as_matrix(a)
    b = companion_block(a, m)
    lhs = generalized_norm(a[:, a.shape[0] - m :])
    rhs = generalized_norm(a) * generalized_norm(b)
    return lhs, rhs

"""Dense linear-algebra helpers built on numpy/scipy.

Matrices are plain 2-D float arrays. Every routine here is a pure function
of its inputs; nothing is cached or mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInput, NotPositiveDefinite

# singular values at or below RANK_RTOL * sigma_max count as zero
RANK_RTOL = 1e-10


def as_matrix(M) -> np.ndarray:
    """Return `M` as a finite 2-D float array, raising InvalidInput otherwise."""
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidInput(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class SpectralData:
    singular_values: np.ndarray
    rank: int
    sigma_max: float
    sigma_min_nonzero: float

    @property
    def kappa(self) -> float:
        if self.rank == 0:
            return float("inf")
        return self.sigma_max / self.sigma_min_nonzero


def singular_values(M) -> SpectralData:
    """Singular values of `M` in non-increasing order, plus numerical rank.

    >>> singular_values([[3.0, 0.0], [0.0, 0.0]]).rank
    1
    """
    A = as_matrix(M)
    s = sla.svdvals(A)
    s = np.sort(s)[::-1]
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return SpectralData(s, 0, 0.0, 0.0)
    nz = s > RANK_RTOL * smax
    rank = int(np.count_nonzero(nz))
    return SpectralData(s, rank, smax, float(s[rank - 1]))


def null_space_basis(M, tol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of `M`.

    A direction v belongs to the null space when ``||M v|| <= tol * sigma_max(M) * ||v||``.
    Full-column-rank input gives a ``(cols, 0)`` array.
    """
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    A = as_matrix(M)
    ncols = A.shape[1]
    _, s, Vt = sla.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(ncols)
    rank = int(np.count_nonzero(s > tol * smax))
    return Vt[rank:].T.copy()


def pseudoinverse(M) -> np.ndarray:
    A = as_matrix(M)
    U, s, Vt = sla.svd(A, full_matrices=False)
    smax = s[0] if s.size else 0.0
    inv = np.zeros_like(s)
    if smax > 0.0:
        keep = s > RANK_RTOL * smax
        inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv) @ U.T


def min_norm_solution(A, b) -> np.ndarray:
    """Minimum-norm least-squares solution ``A^+ b``."""
    A = as_matrix(A)
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != A.shape[0]:
        raise InvalidInput(f"b has length {b.shape[0]}, expected {A.shape[0]}")
    return pseudoinverse(A) @ b


def cholesky(A):
    """Cholesky factor of a symmetric positive definite matrix, for :func:`cho_apply`.

    Raises NotPositiveDefinite when the factorization hits a non-positive pivot
    or `A` is visibly non-symmetric.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise InvalidInput("A must be square")
    scale = max(np.max(np.abs(A)), 1.0)
    if np.max(np.abs(A - A.T)) > 1e-8 * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        return sla.cho_factor(A, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def cho_apply(factor, b) -> np.ndarray:
    return sla.cho_solve(factor, np.asarray(b, dtype=float), check_finite=False)


def solve_spd(A, b) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite `A` via Cholesky."""
    return cho_apply(cholesky(A), b)

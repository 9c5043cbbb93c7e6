"""Dense real linear algebra used by every solver.

All tolerances are relative to the largest singular value, so the routines
behave identically under rescaling of their inputs.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NumericalError

EPS = np.finfo(np.float64).eps


class SvdFactors(NamedTuple):
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


def as_finite(M, name="matrix", ndim=None) -> np.ndarray:
    """Return ``M`` as a float64 array, rejecting NaN/Inf."""
    A = np.asarray(M, dtype=np.float64)
    if ndim is not None and A.ndim != ndim:
        raise InvalidParameterError(f"{name} must be {ndim}-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericalError(f"{name} contains non-finite entries")
    return A


def svd(M) -> SvdFactors:
    """Thin SVD ``M = U diag(s) V^T`` with ``s`` non-increasing."""
    A = as_finite(M, ndim=2)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        # gesdd occasionally fails where the slower gesvd driver succeeds
        try:
            U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError):
            raise NumericalError(f"SVD did not converge: {exc}") from exc
    return SvdFactors(U, s, Vt.T)


def default_rank_tol(shape) -> float:
    return max(shape) * EPS


def numerical_rank(M, rank_tol: float | None = None) -> int:
    s = svd(M).singular_values
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = default_rank_tol(np.shape(M)) if rank_tol is None else rank_tol
    return int(np.count_nonzero(s > tol * s[0]))


def pseudo_inverse(M, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse via SVD.

    Singular values at or below ``rank_tol * sigma_max`` are treated as zero.
    The default ``rank_tol`` is ``max(rows, cols) * eps``.
    """
    A = as_finite(M, ndim=2)
    if rank_tol is None:
        rank_tol = default_rank_tol(A.shape)
    if rank_tol < 0:
        raise InvalidParameterError("rank_tol must be non-negative")
    U, s, V = svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(A.shape[::-1])
    keep = s > rank_tol * s[0]
    return (V[:, keep] / s[keep]) @ U[:, keep].T


def null_space_projector(Phi, rank_tol: float | None = None) -> np.ndarray:
    """Orthogonal projector ``I - pinv(Phi) Phi`` onto the null space of ``Phi``."""
    A = as_finite(Phi, ndim=2)
    if rank_tol is None:
        rank_tol = default_rank_tol(A.shape)
    n = A.shape[1]
    U, s, V = svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(n)
    Vr = V[:, s > rank_tol * s[0]]
    # I - Vr Vr^T is exactly symmetric; symmetrize against rounding anyway
    P = np.eye(n) - Vr @ Vr.T
    return 0.5 * (P + P.T)


def tikhonov_solve(Phi, y, mu: float) -> np.ndarray:
    """Minimize ``||y - Phi x||^2 + mu ||x||^2``.

    Solved through the normal equations ``(Phi^T Phi + mu I) x = Phi^T y``
    with a Cholesky factorization.  ``mu = 0`` returns the least-norm
    least-squares solution ``pinv(Phi) y`` instead.
    """
    A = as_finite(Phi, "Phi", ndim=2)
    b = as_finite(y, "y", ndim=1)
    if b.shape[0] != A.shape[0]:
        raise InvalidParameterError(f"y has length {b.shape[0]}, expected {A.shape[0]}")
    if not np.isfinite(mu) or mu < 0:
        raise InvalidParameterError("mu must be a finite non-negative number")
    if mu == 0:
        return pseudo_inverse(A) @ b
    m, n = A.shape
    try:
        if m < n:
            # (A^T A + mu I)^-1 A^T = A^T (A A^T + mu I)^-1, an m x m solve
            G = A @ A.T
            G[np.diag_indices_from(G)] += mu
            return A.T @ scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), b)
        G = A.T @ A
        G[np.diag_indices_from(G)] += mu
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), A.T @ b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Tikhonov system is not positive definite: {exc}") from exc


def soft_threshold_singular(X, mu: float) -> np.ndarray:
    """Shrink every singular value of ``X`` by ``mu``, flooring at zero."""
    if not np.isfinite(mu) or mu < 0:
        raise InvalidParameterError("mu must be a finite non-negative number")
    U, s, V = svd(X)
    return (U * np.maximum(s - mu, 0.0)) @ V.T


def hard_threshold(x: np.ndarray, keep: int) -> np.ndarray:
    """Zero all but the ``keep`` largest-magnitude entries (stable tie order)."""
    out = np.zeros_like(x)
    if keep <= 0:
        return out
    idx = np.argsort(-np.abs(x), kind="stable")[:keep]
    out[idx] = x[idx]
    return out


def soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

"""Low-rank matrix completion: adaptive singular-value thresholding (MIMAT)
and the SVT and Soft-Impute baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .numerics import soft_threshold_singular, svd
from .results import CompletionResult, CompletionTrace, Termination
from .signals import CompletionProblem, rmse


@dataclass(frozen=True)
class MimatConfig:
    """Stopping rules.  ``eps1`` bounds the squared fit of the thresholded
    iterate on the observed entries (outer loop), ``eps2`` the squared change
    between inner iterates.  ``None`` means ``1e-8 ||P(A)||_F^2`` and
    ``1e-10 ||A||_F^2``."""

    eps1: float | None = None
    eps2: float | None = None
    max_outer: int = 50
    max_inner: int = 1000

    def __post_init__(self):
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise InvalidParameterError("iteration caps must be at least 1")


def _sq(M) -> float:
    return float(np.vdot(M, M))


def mimat(problem: CompletionProblem, cfg: MimatConfig | None = None) -> CompletionResult:
    """Complete ``problem.observed`` by adaptive singular-value thresholding.

    Outer pass ``c`` repeatedly soft-thresholds the current iterate at its
    own ``c``-th singular value (keeping at most ``c - 1`` components) and
    writes the observed entries back, until the iterate stops moving.  Passes
    continue with ``c + 1`` until the thresholded matrix matches the
    observations.
    """
    cfg = cfg or MimatConfig()
    A = problem.observed
    mask = problem.mask
    m, n = A.shape
    normA = _sq(A)
    eps1 = cfg.eps1 if cfg.eps1 is not None else max(1e-8 * normA, np.finfo(float).tiny)
    eps2 = cfg.eps2 if cfg.eps2 is not None else max(1e-10 * normA, np.finfo(float).tiny)
    c_cap = min(m, n, cfg.max_outer)

    trace = CompletionTrace()
    X = A.copy()
    fit = normA  # Z_0 = 0
    best = (fit, X)
    c = 1
    total = 0
    term = Termination.RESIDUAL_MET
    while fit >= eps1:
        if c > c_cap:
            term = Termination.MAX_ITER
            break
        for k in range(cfg.max_inner):
            U, s, V = svd(X)
            mu = float(s[c - 1]) if c <= s.size else 0.0
            shrunk = np.maximum(s - mu, 0.0)
            Z = (U * shrunk) @ V.T
            X_new = np.where(mask, A, Z)
            change = _sq(X_new - X)
            X = X_new
            total += 1
            fit = _sq(np.where(mask, A - Z, 0.0))
            trace.append(c, k, mu, np.count_nonzero(shrunk), math.sqrt(fit))
            if fit < best[0]:
                best = (fit, X)
            if change < eps2:
                break
        c += 1
    if term is Termination.MAX_ITER:
        fit, X = best
    return CompletionResult(X, c - 1, total, math.sqrt(fit), trace, term)


def svt(problem: CompletionProblem, tau: float | None = None, step: float | None = None,
        max_iter: int = 500, tol: float = 1e-4) -> CompletionResult:
    """Singular value thresholding.

    ``X = D_tau(Y)``, ``Y <- Y + step * P(A - X)`` from ``Y = 0``, until
    ``||P(X - A)||_F <= tol ||P(A)||_F``.  Defaults: ``tau = 5 sqrt(m n)``,
    ``step = 1.2 m n / |Omega|``.
    """
    A = problem.observed
    mask = problem.mask
    m, n = A.shape
    tau = 5.0 * math.sqrt(m * n) if tau is None else float(tau)
    step = 1.2 * m * n / np.count_nonzero(mask) if step is None else float(step)
    if tau < 0:
        raise InvalidParameterError("tau must be non-negative")
    if not step > 0:
        raise InvalidParameterError("step must be positive")
    if max_iter < 1 or not tol > 0:
        raise InvalidParameterError("need max_iter >= 1 and tol > 0")
    normA = math.sqrt(_sq(A))
    trace = CompletionTrace()
    Y = np.zeros_like(A)
    X = Y
    term = Termination.MAX_ITER
    fit = normA
    for k in range(max_iter):
        U, s, V = svd(Y)
        shrunk = np.maximum(s - tau, 0.0)
        X = (U * shrunk) @ V.T
        R = np.where(mask, A - X, 0.0)
        fit = math.sqrt(_sq(R))
        trace.append(1, k, tau, np.count_nonzero(shrunk), fit)
        if fit <= tol * normA:
            term = Termination.RESIDUAL_MET
            break
        Y = Y + step * R
    return CompletionResult(X, 1, len(trace), fit, trace, term)


def default_lambda_grid(problem: CompletionProblem, points: int = 20) -> np.ndarray:
    """Decreasing grid from ``sigma_max(P(A))`` down three decades, then 0."""
    top = svd(problem.observed).singular_values[0]
    return np.append(top * np.geomspace(1.0, 1e-3, points), 0.0)


def soft_impute(problem: CompletionProblem, lambda_grid=None, max_iter: int = 500,
                tol: float = 1e-6) -> CompletionResult:
    """Soft-Impute over a decreasing penalty grid with warm starts.

    At each penalty, ``X <- D_lam(P(A) + P_perp(X))`` until the relative
    change falls below ``tol``; this decreases
    ``0.5 ||P(X - A)||_F^2 + lam ||X||_*``.  The returned estimate is the
    grid point with the lowest RMSE against ``problem.true_matrix`` when that
    is known, otherwise the one with the smallest observed-entry fit.
    """
    grid = default_lambda_grid(problem) if lambda_grid is None else np.asarray(lambda_grid, float)
    if grid.size == 0:
        raise InvalidParameterError("lambda grid is empty")
    if np.any(grid < 0):
        raise InvalidParameterError("penalties must be non-negative")
    if max_iter < 1 or not tol > 0:
        raise InvalidParameterError("need max_iter >= 1 and tol > 0")
    A = problem.observed
    mask = problem.mask
    trace = CompletionTrace()
    X = np.zeros_like(A)
    best = None
    total = 0
    for c, lam in enumerate(np.sort(grid)[::-1], start=1):
        for k in range(max_iter):
            U, s, V = svd(np.where(mask, A, X))
            shrunk = np.maximum(s - lam, 0.0)
            X_new = (U * shrunk) @ V.T
            prev = _sq(X)
            change = _sq(X_new - X) / prev if prev > 0 else math.inf
            X = X_new
            total += 1
            fit = math.sqrt(_sq(np.where(mask, A - X, 0.0)))
            trace.append(c, k, lam, np.count_nonzero(shrunk), fit)
            if change < tol:
                break
        if problem.true_matrix is not None:
            score = rmse(problem.true_matrix, X)
        else:
            score = fit
        if best is None or score < best[0]:
            best = (score, X.copy(), c, fit)
    _, X, c, fit = best
    return CompletionResult(X, c, total, fit, trace, Termination.RESIDUAL_MET)


__all__ = ["MimatConfig", "mimat", "svt", "soft_impute", "default_lambda_grid",
           "soft_threshold_singular"]

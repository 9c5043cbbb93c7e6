"""Comparison solvers for sparse recovery.

All of them return a :class:`RecoveryResult` so the harness can sweep them
uniformly.  Defaults are fixed constants; every one can be overridden
through the solver's config dataclass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError
from .numerics import as_finite, hard_threshold, pseudo_inverse, soft_threshold, svd
from .results import IterationTrace, RecoveryResult, Termination
from .signals import SensingOperator, snr_db


def _problem(op, y):
    Phi = op.matrix if isinstance(op, SensingOperator) else as_finite(op, "Phi", ndim=2)
    y = as_finite(y, "y", ndim=1)
    if y.shape[0] != Phi.shape[0]:
        raise InvalidParameterError(f"y has length {y.shape[0]}, operator has {Phi.shape[0]} rows")
    return Phi, y


def _lstsq_on(Phi, y, idx):
    x = np.zeros(Phi.shape[1])
    if len(idx):
        x[idx] = np.linalg.lstsq(Phi[:, idx], y, rcond=None)[0]
    return x


def _sq(v):
    return float(v @ v)


# ---------------------------------------------------------------- greedy

@dataclass(frozen=True)
class OmpConfig:
    residual_tol: float = 1e-10

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise InvalidParameterError("residual_tol must be positive")


def omp(op, y, s: int, cfg: OmpConfig | None = None) -> RecoveryResult:
    """Orthogonal matching pursuit with at most ``s`` atoms.

    Stops early once ``||r|| <= residual_tol * ||y||``.
    """
    cfg = cfg or OmpConfig()
    Phi, y = _problem(op, y)
    m, n = Phi.shape
    if s < 1:
        raise InvalidParameterError("s must be at least 1")
    if s > m:
        raise InvalidParameterError(f"s={s} exceeds the number of measurements m={m}")
    norms = np.linalg.norm(Phi, axis=0)
    norms[norms == 0] = np.inf
    trace = IterationTrace()
    support: list[int] = []
    x = np.zeros(n)
    r = y.copy()
    ny = np.linalg.norm(y)
    term = Termination.SPARSITY_BUDGET
    if np.linalg.norm(r) <= cfg.residual_tol * ny:
        return RecoveryResult(x, 0, trace, Termination.RESIDUAL_MET)
    for _ in range(s):
        corr = np.abs(Phi.T @ r) / norms
        corr[support] = -1.0
        support.append(int(np.argmax(corr)))
        x = _lstsq_on(Phi, y, support)
        r = y - Phi @ x
        trace.append(support_size=len(support), residual=_sq(r))
        if np.linalg.norm(r) <= cfg.residual_tol * ny:
            term = Termination.RESIDUAL_MET
            break
    return RecoveryResult(x, len(trace), trace, term)


@dataclass(frozen=True)
class CosampConfig:
    residual_tol: float = 1e-10
    max_iter: int = 100

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise InvalidParameterError("residual_tol must be positive")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be at least 1")


def cosamp(op, y, s: int, cfg: CosampConfig | None = None) -> RecoveryResult:
    cfg = cfg or CosampConfig()
    Phi, y = _problem(op, y)
    m, n = Phi.shape
    if s < 1:
        raise InvalidParameterError("s must be at least 1")
    if 3 * s > m:
        raise InvalidParameterError(f"CoSaMP needs 3s <= m, got s={s}, m={m}")
    trace = IterationTrace()
    x = np.zeros(n)
    r = y.copy()
    ny = np.linalg.norm(y)
    best = (np.inf, x)
    term = Termination.MAX_ITER
    for _ in range(cfg.max_iter):
        proxy = np.abs(Phi.T @ r)
        omega = np.argsort(-proxy, kind="stable")[: 2 * s]
        merged = np.union1d(omega, np.flatnonzero(x))
        b = _lstsq_on(Phi, y, merged)
        x = hard_threshold(b, s)
        r = y - Phi @ x
        rn = np.linalg.norm(r)
        trace.append(support_size=np.count_nonzero(x), residual=rn * rn)
        if rn < best[0]:
            best = (rn, x)
        if rn <= cfg.residual_tol * ny:
            term = Termination.RESIDUAL_MET
            break
        # an unchanged residual means the support set has reached a fixed point
        if len(trace) > 1 and abs(trace.residuals[-2] - rn * rn) <= 1e-15 * ny * ny:
            break
    return RecoveryResult(best[1], len(trace), trace, term)


# ---------------------------------------------------------------- thresholding

@dataclass(frozen=True)
class IhtConfig:
    s: int | None = None
    threshold: float | None = None
    step: float | None = None
    max_iter: int = 1000
    residual_tol: float = 1e-10

    def __post_init__(self):
        if self.s is None and self.threshold is None:
            raise InvalidParameterError("IHT needs either a sparsity s or a hard threshold")
        if self.s is not None and self.s < 1:
            raise InvalidParameterError("s must be at least 1")
        if self.step is not None and not self.step > 0:
            raise InvalidParameterError("step must be positive")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be at least 1")


def _diverged(x, r, ny):
    return not np.all(np.isfinite(x)) or np.linalg.norm(r) > 1e8 * max(ny, 1e-300)


def iht(op, y, cfg: IhtConfig) -> RecoveryResult:
    """Iterative hard thresholding ``x <- H(x + step * Phi^T (y - Phi x))``.

    ``H`` keeps the ``s`` largest magnitudes, or zeroes entries below
    ``threshold`` when no sparsity is given.  The default step
    ``1 / sigma_max(Phi)^2`` keeps the gradient step non-expansive.
    """
    Phi, y = _problem(op, y)
    n = Phi.shape[1]
    step = cfg.step if cfg.step is not None else 1.0 / svd(Phi).singular_values[0] ** 2
    trace = IterationTrace()
    x = np.zeros(n)
    ny = np.linalg.norm(y)
    term = Termination.MAX_ITER
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.max_iter):
            g = x + step * (Phi.T @ (y - Phi @ x))
            if cfg.s is not None:
                x = hard_threshold(g, cfg.s)
                thr = np.sort(np.abs(g))[-cfg.s] if np.all(np.isfinite(g)) else math.nan
            else:
                x = np.where(np.abs(g) >= cfg.threshold, g, 0.0)
                thr = cfg.threshold
            r = y - Phi @ x
            if _diverged(x, r, ny):
                break
            trace.append(thr=thr, support_size=np.count_nonzero(x), residual=_sq(r))
            if np.linalg.norm(r) <= cfg.residual_tol * ny:
                term = Termination.RESIDUAL_MET
                break
    return RecoveryResult(x, len(trace), trace, term)


@dataclass(frozen=True)
class ImatConfig:
    relaxation: float | None = 1.0
    alpha: float = 0.1
    beta: float | None = None
    max_iter: int = 500
    residual_tol: float = 1e-10

    def __post_init__(self):
        if self.relaxation is not None and not self.relaxation > 0:
            raise InvalidParameterError("relaxation must be positive")
        if self.alpha < 0:
            raise InvalidParameterError("alpha must be non-negative")
        if self.beta is not None and self.beta < 0:
            raise InvalidParameterError("beta must be non-negative")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be at least 1")


def imat(op, y, cfg: ImatConfig | None = None) -> RecoveryResult:
    """Iterative method with exponentially decaying hard threshold.

    ``x <- H_t(x + relaxation * Phi^T (y - Phi x))`` with
    ``t_k = beta * exp(-alpha * k)``; ``beta`` defaults to ``max |Phi^T y|``
    and ``relaxation=None`` means ``1 / sigma_max(Phi)^2``, which keeps the
    unthresholded step non-expansive (a unit step can diverge on noisy data
    once the threshold has decayed).
    """
    cfg = cfg or ImatConfig()
    Phi, y = _problem(op, y)
    n = Phi.shape[1]
    beta = cfg.beta if cfg.beta is not None else float(np.max(np.abs(Phi.T @ y)))
    relax = cfg.relaxation
    if relax is None:
        relax = 1.0 / svd(Phi).singular_values[0] ** 2
    trace = IterationTrace()
    x = np.zeros(n)
    ny = np.linalg.norm(y)
    term = Termination.MAX_ITER
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(cfg.max_iter):
            thr = beta * math.exp(-cfg.alpha * k)
            g = x + relax * (Phi.T @ (y - Phi @ x))
            x_new = np.where(np.abs(g) >= thr, g, 0.0) if thr > 0 else g
            r = y - Phi @ x_new
            if _diverged(x_new, r, ny):
                break
            x = x_new
            trace.append(thr=thr, support_size=np.count_nonzero(x), residual=_sq(r))
            if np.linalg.norm(r) <= cfg.residual_tol * ny:
                term = Termination.RESIDUAL_MET
                break
    return RecoveryResult(x, len(trace), trace, term)


@dataclass(frozen=True)
class Sl0Config:
    """Smoothed-l0 schedule.  ``sigma0=None`` means ``2 max|pinv(Phi) y|``;
    the outer loop stops below ``sigma_min_ratio * sigma0``."""

    sigma0: float | None = None
    decay: float = 0.5
    sigma_min_ratio: float = 1e-6
    inner_steps: int = 3
    step: float = 2.0

    def __post_init__(self):
        if not 0 < self.decay < 1:
            raise InvalidParameterError("decay must lie in (0, 1)")
        if not 0 < self.sigma_min_ratio < 1:
            raise InvalidParameterError("sigma_min_ratio must lie in (0, 1)")
        if self.inner_steps < 1:
            raise InvalidParameterError("inner_steps must be at least 1")
        if not self.step > 0:
            raise InvalidParameterError("step must be positive")


def sl0(op, y, cfg: Sl0Config | None = None) -> RecoveryResult:
    cfg = cfg or Sl0Config()
    Phi, y = _problem(op, y)
    P = pseudo_inverse(Phi)
    x = P @ y
    sigma = cfg.sigma0 if cfg.sigma0 is not None else 2.0 * float(np.max(np.abs(x)))
    trace = IterationTrace()
    if sigma == 0:
        return RecoveryResult(x, 0, trace, Termination.RESIDUAL_MET)
    sigma_min = cfg.sigma_min_ratio * sigma
    while sigma > sigma_min:
        for _ in range(cfg.inner_steps):
            x = x - cfg.step * x * np.exp(-x * x / (2.0 * sigma * sigma))
            x = x - P @ (Phi @ x - y)
        r = y - Phi @ x
        trace.append(thr=sigma, support_size=np.count_nonzero(np.abs(x) > sigma), residual=_sq(r))
        sigma *= cfg.decay
    return RecoveryResult(x, len(trace), trace, Termination.RESIDUAL_MET)


# ---------------------------------------------------------------- l1

@dataclass(frozen=True)
class LassoConfig:
    """ADMM for ``min ||y - Phi x||^2 + lam ||x||_1``.

    ``lam=None`` means ``1e-3 * ||Phi^T y||_inf``.  With ``adaptive_rho``
    the penalty is doubled or halved every 10 iterations whenever the primal
    and dual residuals differ by more than a factor 10.
    """

    lam: float | None = None
    rho: float = 1.0
    max_iter: int = 10000
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    adaptive_rho: bool = True

    def __post_init__(self):
        if self.lam is not None and not self.lam >= 0:
            raise InvalidParameterError("lam must be non-negative")
        if not self.rho > 0:
            raise InvalidParameterError("rho must be positive")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be at least 1")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidParameterError("tolerances must be positive")


def lasso_objective(Phi, y, x, lam) -> float:
    r = y - Phi @ x
    return float(r @ r + lam * np.abs(x).sum())


def _ridge_solver(Phi, rho):
    """Return ``v -> (Phi^T Phi + rho I)^{-1} v`` with a cached factorization."""
    m, n = Phi.shape
    if m < n:
        F = scipy.linalg.cho_factor(Phi @ Phi.T + rho * np.eye(m))
        return lambda v: (v - Phi.T @ scipy.linalg.cho_solve(F, Phi @ v)) / rho
    F = scipy.linalg.cho_factor(Phi.T @ Phi + rho * np.eye(n))
    return lambda v: scipy.linalg.cho_solve(F, v)


def lasso_admm(op, y, cfg: LassoConfig | None = None, warm=None) -> RecoveryResult:
    """LASSO by operator splitting; returns the sparse ``z`` iterate.

    The objective has no 1/2 factor, so the shrinkage step uses
    ``lam / (2 rho)``.  ``warm`` is an optional ``(z, u)`` pair used by
    :func:`lasso_tune` to walk down a regularization path.
    """
    cfg = cfg or LassoConfig()
    Phi, y = _problem(op, y)
    n = Phi.shape[1]
    Phity = Phi.T @ y
    lam = cfg.lam if cfg.lam is not None else 1e-3 * float(np.max(np.abs(Phity)))
    rho = cfg.rho
    solve = _ridge_solver(Phi, rho)
    if warm is None:
        z = np.zeros(n)
        u = np.zeros(n)
    else:
        z, u = (np.array(a, dtype=np.float64) for a in warm)
    trace = IterationTrace()
    term = Termination.MAX_ITER
    sqn = math.sqrt(n)
    for it in range(cfg.max_iter):
        x = solve(Phity + rho * (z - u))
        z_old = z
        z = soft_threshold(x + u, lam / (2.0 * rho))
        u = u + x - z
        r = y - Phi @ z
        trace.append(thr=lam / (2.0 * rho), support_size=np.count_nonzero(z), residual=_sq(r),
                     objective=float(r @ r + lam * np.abs(z).sum()))
        pri = np.linalg.norm(x - z)
        dual = rho * np.linalg.norm(z - z_old)
        eps_pri = sqn * cfg.abs_tol + cfg.rel_tol * max(np.linalg.norm(x), np.linalg.norm(z))
        eps_dual = sqn * cfg.abs_tol + cfg.rel_tol * rho * np.linalg.norm(u)
        if pri <= eps_pri and dual <= eps_dual:
            term = Termination.RESIDUAL_MET
            break
        if cfg.adaptive_rho and (it + 1) % 10 == 0:
            # u is scaled by 1/rho, so it is rescaled along with rho
            if pri > 10.0 * dual:
                rho *= 2.0
                u = u / 2.0
                solve = _ridge_solver(Phi, rho)
            elif dual > 10.0 * pri:
                rho /= 2.0
                u = u * 2.0
                solve = _ridge_solver(Phi, rho)
    result = RecoveryResult(z, len(trace), trace, term)
    # scaled dual at the final penalty, for warm starts
    result.dual = u * rho / cfg.rho
    return result


def lambda_grid(Phi, y, points: int = 20, lo: float = 1e-4, hi: float = 1.0) -> np.ndarray:
    """Log-spaced penalties over ``[lo, hi] * ||Phi^T y||_inf``, largest first."""
    scale = float(np.max(np.abs(Phi.T @ y)))
    return scale * np.geomspace(hi, lo, points)


def lasso_tune(op, y, x_true, cfg: LassoConfig | None = None, points: int = 20,
               lo: float = 1e-4, hi: float = 1.0):
    """Sweep the penalty grid with warm starts; keep the best output SNR.

    Returns ``(result, lam)``.  Needs the true signal, so it is a benchmark
    device rather than a practical tuning rule.
    """
    cfg = cfg or LassoConfig()
    Phi, y = _problem(op, y)
    x_true = np.asarray(x_true, dtype=np.float64)
    best = None
    warm = None
    for lam in lambda_grid(Phi, y, points, lo, hi):
        res = lasso_admm(Phi, y, replace(cfg, lam=float(lam)), warm=warm)
        warm = (res.estimate, res.dual)
        score = snr_db(x_true, res.estimate)
        if best is None or score > best[0]:
            best = (score, res, float(lam))
    return best[1], best[2]

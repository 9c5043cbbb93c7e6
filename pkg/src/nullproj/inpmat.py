"""Iterative null-space projection with adaptive thresholding.

Each iteration picks a support ``T`` from the current iterate, fits the
measurements on that support, and projects the fit back onto the solution
set ``{x : Phi x = y}`` (for a Tikhonov start, onto ``x0 + null(Phi)``).
The threshold defining ``T`` never increases, so the support can only be
relaxed over time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .numerics import as_finite, default_rank_tol, pseudo_inverse, svd, tikhonov_solve
from .results import IterationTrace, RecoveryResult, Termination
from .signals import SensingOperator

THRESHOLD_SOURCES = ("fresh", "previous")


@dataclass(frozen=True)
class InpmatConfig:
    """Solver settings.

    eps:
        Stop once the support fit ``||y - Phi s||^2`` drops below ``eps``.
        ``None`` picks ``m * noise_var`` when a noise variance is given and
        ``1e-10 * ||y||^2`` otherwise.
    max_iter:
        Iteration cap; ``None`` means ``n``.
    threshold_source:
        ``"fresh"`` sets the next threshold from the largest off-support entry
        of the new iterate (clamped so it never increases); ``"previous"``
        uses the iterate the support was computed from.
    tikhonov_mu:
        Ridge parameter for the starting point; 0 starts from ``pinv(Phi) y``.
    objective_lambda:
        Sparsity weight used only for the monitored objective in the trace.
    """

    eps: float | None = None
    max_iter: int | None = None
    threshold_source: str = "fresh"
    tikhonov_mu: float = 0.0
    rank_tol: float | None = None
    noise_var: float | None = None
    objective_lambda: float = 0.0

    def __post_init__(self):
        if self.eps is not None and not self.eps > 0:
            raise InvalidParameterError("eps must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise InvalidParameterError("max_iter must be at least 1")
        if self.threshold_source not in THRESHOLD_SOURCES:
            raise InvalidParameterError(
                f"threshold_source must be one of {THRESHOLD_SOURCES}, got {self.threshold_source!r}")
        if not self.tikhonov_mu >= 0:
            raise InvalidParameterError("tikhonov_mu must be non-negative")
        if self.rank_tol is not None and self.rank_tol < 0:
            raise InvalidParameterError("rank_tol must be non-negative")
        if self.noise_var is not None and self.noise_var < 0:
            raise InvalidParameterError("noise_var must be non-negative")
        if self.objective_lambda < 0:
            raise InvalidParameterError("objective_lambda must be non-negative")

    def resolve_eps(self, y: np.ndarray) -> float:
        if self.eps is not None:
            return self.eps
        if self.noise_var:
            return y.size * self.noise_var
        return max(1e-10 * float(y @ y), np.finfo(float).tiny)


def _matrix(op) -> np.ndarray:
    if isinstance(op, SensingOperator):
        return op.matrix
    return as_finite(op, "Phi", ndim=2)


def _check_problem(op, y):
    Phi = _matrix(op)
    y = as_finite(y, "y", ndim=1)
    if y.shape[0] != Phi.shape[0]:
        raise InvalidParameterError(f"y has length {y.shape[0]}, operator has {Phi.shape[0]} rows")
    return Phi, y


def support_mask(x, thr: float) -> np.ndarray:
    """Boolean diagonal of ``T``: ``|x_i| >= thr`` (inclusive)."""
    if thr < 0:
        raise InvalidParameterError("threshold must be non-negative")
    return np.abs(np.asarray(x)) >= thr


def objective(x, T, lam: float) -> float:
    """``||(I - T) x||^2 + lam * trace(T)``; ``T`` may be relaxed to ``[0, 1]^n``."""
    if lam < 0:
        raise InvalidParameterError("lambda must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(T, dtype=np.float64)
    r = (1.0 - t) * x
    return float(r @ r + lam * t.sum())


def _support_fit(Phi, y, idx, rcond):
    s = np.zeros(Phi.shape[1])
    if idx.size:
        s[idx] = np.linalg.lstsq(Phi[:, idx], y, rcond=rcond)[0]
    return s


def _iterate(Phi, y, cfg: InpmatConfig, stop_after=None):
    """Run the main loop; returns ``(x, iterations, trace, termination)``."""
    m, n = Phi.shape
    rank_tol = default_rank_tol(Phi.shape) if cfg.rank_tol is None else cfg.rank_tol
    trace = IterationTrace()
    sv = svd(Phi).singular_values
    rank = int(np.count_nonzero(sv > rank_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    Phi_pinv = pseudo_inverse(Phi, rank_tol)
    if cfg.tikhonov_mu > 0:
        x0 = tikhonov_solve(Phi, y, cfg.tikhonov_mu)
    else:
        x0 = Phi_pinv @ y
    thr = float(np.max(np.abs(x0))) if n else 0.0
    if rank == n or thr == 0.0:
        # trivial null space (unique solution) or y = 0: nothing to sparsify
        return x0, 0, trace, Termination.RESIDUAL_MET

    eps = cfg.resolve_eps(y)
    max_iter = n if cfg.max_iter is None else cfg.max_iter
    if stop_after is not None:
        max_iter = min(max_iter, stop_after)
    lam = cfg.objective_lambda
    x = x0
    termination = Termination.MAX_ITER
    k = 0
    while k < max_iter:
        T = support_mask(x, thr)
        idx = np.flatnonzero(T)
        if idx.size > m:
            termination = Termination.SPARSITY_BUDGET
            break
        s = _support_fit(Phi, y, idx, rank_tol)
        fit = y - Phi @ s
        x_new = x0 + s - Phi_pinv @ (Phi @ s)
        off = ~T
        off_new = np.abs(x_new[off])
        contraction = float(off_new @ off_new)
        r = y - Phi @ x_new
        trace.append(thr, idx.size, float(r @ r), contraction, contraction + lam * idx.size)
        if cfg.threshold_source == "fresh":
            new_thr = min(thr, float(off_new.max())) if off_new.size else 0.0
        else:
            off_old = np.abs(x[off])
            new_thr = float(off_old.max()) if off_old.size else 0.0
        x = x_new
        k += 1
        if stop_after is None and float(fit @ fit) < eps:
            termination = Termination.RESIDUAL_MET
            break
        if new_thr == 0.0:
            # off-support part vanished: the iterate is supported on T
            termination = Termination.RESIDUAL_MET
            break
        thr = new_thr
    else:
        if stop_after is not None and k == stop_after:
            termination = Termination.SPARSITY_BUDGET
    return x, k, trace, termination


def inpmat(op, y, cfg: InpmatConfig | None = None) -> RecoveryResult:
    """Recover a sparse ``x`` from ``y = Phi x`` without knowing its sparsity."""
    cfg = cfg or InpmatConfig()
    Phi, y = _check_problem(op, y)
    x, k, trace, term = _iterate(Phi, y, cfg)
    return RecoveryResult(x, k, trace, term)


def inpmat_known_sparsity(op, y, s: int, cfg: InpmatConfig | None = None) -> RecoveryResult:
    """Variant for known sparsity ``s``.

    Iterates until the iteration count exceeds ``s``, keeps the ``s``
    largest entries of the last iterate and refits them by least squares.
    """
    cfg = cfg or InpmatConfig()
    Phi, y = _check_problem(op, y)
    n = Phi.shape[1]
    if not 1 <= s <= n:
        raise InvalidParameterError(f"need 1 <= s <= n, got s={s}")
    x, k, trace, term = _iterate(Phi, y, cfg, stop_after=s + 1)
    idx = np.sort(np.argsort(-np.abs(x), kind="stable")[:s])
    rank_tol = default_rank_tol(Phi.shape) if cfg.rank_tol is None else cfg.rank_tol
    est = _support_fit(Phi, y, idx, rank_tol)
    return RecoveryResult(est, k, trace, term)


def alternating_projection(x_init, T, op, y, iters: int, history: list | None = None) -> np.ndarray:
    """Alternate ``x <- T x`` and ``x <- x - pinv(Phi)(Phi x - y)``.

    With a fixed support this replaces the explicit support fit of the main
    loop.  If ``history`` is given, the off-support energy
    ``||(I - T) x||^2`` of the starting point and of each cycle's output is
    appended to it.
    """
    if iters < 1:
        raise InvalidParameterError("iters must be at least 1")
    Phi, y = _check_problem(op, y)
    x = as_finite(x_init, "x_init", ndim=1).copy()
    t = np.asarray(T, dtype=bool)
    if t.shape != x.shape:
        raise InvalidParameterError("mask and x_init differ in length")
    Phi_pinv = pseudo_inverse(Phi)
    if history is not None:
        history.append(float(x[~t] @ x[~t]))
    for _ in range(iters):
        x = np.where(t, x, 0.0)
        x = x - Phi_pinv @ (Phi @ x - y)
        if history is not None:
            history.append(float(x[~t] @ x[~t]))
    return x


__all__ = [
    "InpmatConfig", "support_mask", "objective", "inpmat", "inpmat_known_sparsity",
    "alternating_projection", "THRESHOLD_SOURCES",
]

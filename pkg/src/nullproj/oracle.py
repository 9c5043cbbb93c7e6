"""Exhaustive ground truth for small problems.

Everything here enumerates supports, so it is restricted to ``n <= 24`` and
supports of at most 4 indices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GuardExceededError, InvalidParameterError, NotFoundError
from .numerics import as_finite
from .signals import SensingOperator, SparseSignal

MAX_N = 24
MAX_K = 4


@dataclass(frozen=True)
class RipEstimate:
    k: int
    delta_k: float
    argmax_support: tuple


def _matrix(op):
    return op.matrix if isinstance(op, SensingOperator) else as_finite(op, "Phi", ndim=2)


def _guard(n, k):
    if n > MAX_N or k > MAX_K:
        raise GuardExceededError(
            f"exhaustive search limited to n <= {MAX_N}, k <= {MAX_K}; got n={n}, k={k}")


def l0_brute_force(op, y, max_s: int, feas_tol: float = 1e-8) -> SparseSignal:
    """Sparsest ``x`` with ``||Phi x - y|| <= feas_tol ||y||``.

    Supports are tried by size and then in lexicographic order; the first
    feasible one wins, which makes the answer deterministic.
    """
    Phi = np.ascontiguousarray(_matrix(op))
    y = np.ascontiguousarray(as_finite(y, "y", ndim=1))
    m, n = Phi.shape
    if y.shape[0] != m:
        raise InvalidParameterError(f"y has length {y.shape[0]}, expected {m}")
    if max_s < 1:
        raise InvalidParameterError("max_s must be at least 1")
    _guard(n, max_s)
    if not np.any(y):
        return SparseSignal(np.zeros(n), frozenset())
    hit = kernels.l0_search(Phi, y, max_s, feas_tol)
    if hit is None:
        raise NotFoundError(f"no feasible solution with at most {max_s} nonzeros")
    support, z = hit
    x = np.zeros(n)
    x[list(support)] = z
    return SparseSignal(x, frozenset(support))


def rip_constant(Phi, k: int) -> RipEstimate:
    """Amplitude-form restricted isometry constant.

    Smallest ``delta`` with ``(1 - delta)||x|| <= ||Phi x|| <= (1 + delta)||x||``
    for every ``k``-sparse ``x``, i.e. the worst ``max(1 - s_min, s_max - 1)``
    over the column submatrices of size ``k``.  Note this bounds norms, not
    squared norms as in the more common convention.
    """
    A = _matrix(Phi)
    n = A.shape[1]
    if k < 1 or k > n:
        raise InvalidParameterError(f"need 1 <= k <= n, got k={k}")
    _guard(n, k)
    gram = np.ascontiguousarray(A.T @ A)
    delta, support = kernels.rip_extremes(gram, k)
    return RipEstimate(k, max(float(delta), 0.0), tuple(support))


def thm3_snr_floor(snr0_db: float, delta_k: float) -> float:
    """Guaranteed output SNR ``snr0 + 20 log10((1 - d) / (2 - d))``."""
    if not 0 <= delta_k < 1:
        raise InvalidParameterError("the bound needs 0 <= delta_k < 1")
    return float(snr0_db + 20.0 * math.log10((1.0 - delta_k) / (2.0 - delta_k)))

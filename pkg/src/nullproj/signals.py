"""Test-problem construction and quality metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import InvalidParameterError, NumericalError
from .numerics import as_finite, svd
from .rng import make_rng

SYNTHESES = ("identity", "dct")
KINDS = ("gaussian", "random-sampling")


@dataclass(frozen=True)
class SparseSignal:
    values: np.ndarray
    support: frozenset

    @property
    def sparsity(self) -> int:
        return len(self.support)

    @classmethod
    def from_values(cls, values) -> "SparseSignal":
        v = np.asarray(values, dtype=np.float64)
        return cls(v, frozenset(int(i) for i in np.flatnonzero(v)))


@dataclass(frozen=True)
class SensingOperator:
    """An ``m x n`` measurement map plus the recipe that produced it.

    For ``random-sampling`` the matrix is ``S @ Psi`` where ``S`` picks
    ``sample_rows`` of the identity and ``Psi`` is an orthonormal synthesis
    transform, so the signal is sparse in the transform domain and sampled in
    the ambient one.
    """

    kind: str
    matrix: np.ndarray
    sample_rows: np.ndarray | None = None
    synthesis: str | None = None
    seed: int | None = None

    @property
    def shape(self):
        return self.matrix.shape

    def descriptor(self) -> dict:
        m, n = self.matrix.shape
        return {"kind": self.kind, "m": m, "n": n, "seed": self.seed, "synthesis": self.synthesis}

    @classmethod
    def from_descriptor(cls, d: dict) -> "SensingOperator":
        try:
            return gen_sensing(d["kind"], int(d["m"]), int(d["n"]), int(d["seed"]),
                               synthesis=d.get("synthesis") or "dct")
        except KeyError as exc:
            raise InvalidParameterError(f"operator descriptor is missing {exc}") from None


@dataclass(frozen=True)
class MeasurementSet:
    y: np.ndarray
    input_snr_db: float = math.inf
    noise_seed: int | None = None


@dataclass
class CompletionProblem:
    """Partially observed matrix; ``mask[i, j]`` is True on observed entries."""

    observed: np.ndarray
    mask: np.ndarray
    true_matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.observed = as_finite(self.observed, "observed", ndim=2)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.observed.shape:
            raise InvalidParameterError("mask and observed matrix differ in shape")
        if not self.mask.any():
            raise InvalidParameterError("observation set is empty")
        if np.any(self.observed[~self.mask] != 0):
            raise InvalidParameterError("unobserved entries must be zero")

    @property
    def omega(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.mask))]

    @classmethod
    def from_omega(cls, values, omega, shape=None, true_matrix=None) -> "CompletionProblem":
        """Build from a full (or zero-filled) matrix and a list of ``(row, col)`` pairs."""
        V = np.asarray(values, dtype=np.float64)
        shape = V.shape if shape is None else tuple(shape)
        mask = np.zeros(shape, dtype=bool)
        for i, j in omega:
            mask[int(i), int(j)] = True
        return cls(np.where(mask, V, 0.0), mask, true_matrix)


def gen_sparse_signal(n: int, s: int, seed: int) -> SparseSignal:
    """Uniform random support of size ``s``, standard normal amplitudes."""
    if not 1 <= s <= n:
        raise InvalidParameterError(f"need 1 <= s <= n, got s={s}, n={n}")
    rng = make_rng(seed)
    support = rng.choice(n, size=s, replace=False)
    amps = rng.standard_normal(s)
    # a standard normal draw of exactly 0.0 would break the support invariant
    amps[amps == 0.0] = 1.0
    x = np.zeros(n)
    x[support] = amps
    return SparseSignal(x, frozenset(int(i) for i in support))


def synthesis_matrix(name: str, n: int) -> np.ndarray:
    """Orthonormal ``n x n`` synthesis transform (columns are atoms)."""
    if name == "identity":
        return np.eye(n)
    if name == "dct":
        # columns are inverse DCT-II basis vectors: signal = Psi @ coefficients
        return scipy.fft.idct(np.eye(n), norm="ortho", axis=0)
    raise InvalidParameterError(f"unknown synthesis transform {name!r}; expected one of {SYNTHESES}")


def gen_sensing(kind: str, m: int, n: int, seed: int, synthesis: str = "dct") -> SensingOperator:
    if not 1 <= m <= n:
        raise InvalidParameterError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = make_rng(seed)
    if kind == "gaussian":
        return SensingOperator("gaussian", rng.standard_normal((m, n)) / math.sqrt(m), seed=seed)
    if kind == "random-sampling":
        rows = np.sort(rng.choice(n, size=m, replace=False))
        Psi = synthesis_matrix(synthesis, n)
        return SensingOperator("random-sampling", Psi[rows], sample_rows=rows,
                               synthesis=synthesis, seed=seed)
    raise InvalidParameterError(f"unknown operator kind {kind!r}; expected one of {KINDS}")


def measure(op, x) -> MeasurementSet:
    Phi = op.matrix if isinstance(op, SensingOperator) else as_finite(op, ndim=2)
    x = as_finite(x, "x", ndim=1)
    if x.shape[0] != Phi.shape[1]:
        raise InvalidParameterError(f"x has length {x.shape[0]}, operator expects {Phi.shape[1]}")
    return MeasurementSet(Phi @ x)


def add_noise_at_snr(y, snr_db: float, seed: int) -> MeasurementSet:
    """Add white Gaussian noise rescaled so the realized SNR is exactly ``snr_db``."""
    y = as_finite(y, "y", ndim=1)
    if math.isinf(snr_db) and snr_db > 0:
        return MeasurementSet(y.copy())
    if not math.isfinite(snr_db):
        raise InvalidParameterError("snr_db must be finite (or +inf for no noise)")
    ny = np.linalg.norm(y)
    if ny == 0:
        raise NumericalError("SNR is undefined for a zero measurement vector")
    e = make_rng(seed).standard_normal(y.shape)
    e *= ny * 10.0 ** (-snr_db / 20.0) / np.linalg.norm(e)
    return MeasurementSet(y + e, float(snr_db), seed)


def snr_db(reference, estimate) -> float:
    """``20 log10(||ref|| / ||ref - est||)``; ``inf`` when the estimate is exact."""
    ref = np.asarray(reference, dtype=np.float64)
    est = np.asarray(estimate, dtype=np.float64)
    if ref.shape != est.shape:
        raise InvalidParameterError(f"shape mismatch {ref.shape} vs {est.shape}")
    nr = np.linalg.norm(ref)
    if nr == 0:
        raise NumericalError("SNR is undefined for a zero reference")
    ne = np.linalg.norm(ref - est)
    if ne == 0:
        return math.inf
    return float(20.0 * np.log10(nr / ne))


def rmse(A, B, mask=None) -> float:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise InvalidParameterError(f"shape mismatch {A.shape} vs {B.shape}")
    D = A - B
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        D = D[mask]
    if D.size == 0:
        raise InvalidParameterError("RMSE over an empty mask")
    return float(np.linalg.norm(D) / math.sqrt(D.size))


def gen_low_rank(m: int, n: int, r: int, seed: int) -> np.ndarray:
    """Rank-``r`` product of Gaussian factors scaled to unit per-entry RMS."""
    if not 1 <= r <= min(m, n):
        raise InvalidParameterError(f"need 1 <= r <= min(m, n), got r={r}")
    rng = make_rng(seed)
    M = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    return M / math.sqrt(np.mean(M * M))


def coherence(Phi) -> float:
    A = as_finite(Phi, ndim=2)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise NumericalError("coherence is undefined with a zero column")
    G = np.abs((A / norms).T @ (A / norms))
    np.fill_diagonal(G, 0.0)
    return float(G.max()) if G.size > 1 else 0.0


def subsample_matrix(M, missing_fraction: float, seed: int) -> CompletionProblem:
    M = as_finite(M, "M", ndim=2)
    if not 0 <= missing_fraction < 1:
        raise InvalidParameterError("missing_fraction must lie in [0, 1)")
    total = M.size
    keep = round((1.0 - missing_fraction) * total)
    if keep == 0:
        raise InvalidParameterError("no entries would be observed")
    idx = make_rng(seed).choice(total, size=keep, replace=False)
    mask = np.zeros(total, dtype=bool)
    mask[idx] = True
    mask = mask.reshape(M.shape)
    return CompletionProblem(np.where(mask, M, 0.0), mask, M.copy())


def spectral_norm(M) -> float:
    s = svd(M).singular_values
    return float(s[0]) if s.size else 0.0

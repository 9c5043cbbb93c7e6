"""Numpy implementations of the enumeration kernels.

Same contracts as the compiled ``_kernels`` module; used when the extension
is not built, and as the reference it is tested against.
"""
from __future__ import annotations

import itertools

import numpy as np


def _combinations(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), k)), dtype=np.intp).reshape(-1, k)


def rip_extremes(gram: np.ndarray, k: int):
    n = gram.shape[0]
    if not 1 <= k <= min(4, n):
        raise ValueError("k out of range")
    C = _combinations(n, k)
    sub = gram[C[:, :, None], C[:, None, :]]
    w = np.linalg.eigvalsh(sub)
    lo = np.sqrt(np.maximum(w[:, 0], 0.0))
    hi = np.sqrt(np.maximum(w[:, -1], 0.0))
    d = np.maximum(1.0 - lo, hi - 1.0)
    best = int(np.argmax(d))
    return float(d[best]), tuple(int(i) for i in C[best])


def l0_search(phi: np.ndarray, y: np.ndarray, max_s: int, feas_tol: float):
    m, n = phi.shape
    if not 1 <= max_s <= 4:
        raise ValueError("max_s out of range")
    ny = np.linalg.norm(y)
    for k in range(1, min(max_s, n) + 1):
        C = _combinations(n, k)
        sub = np.transpose(phi[:, C], (1, 0, 2))
        Q, R = np.linalg.qr(sub)
        qty = np.einsum("bmk,m->bk", Q, y)
        res = y[None, :] - np.einsum("bmk,bk->bm", Q, qty)
        col = np.linalg.norm(sub, axis=1)
        diag = np.abs(np.diagonal(R, axis1=1, axis2=2))
        independent = np.all(diag > 1e-12 * col, axis=1)
        ok = independent & (np.linalg.norm(res, axis=1) <= feas_tol * ny)
        hits = np.flatnonzero(ok)
        if hits.size:
            b = int(hits[0])
            z = np.linalg.solve(R[b], qty[b])
            return tuple(int(i) for i in C[b]), z
    return None

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled exhaustive-enumeration kernels (see kernels_py for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

cdef enum:
    KMAX = 4


cdef inline bint _next_combination(int* idx, int k, int n) noexcept nogil:
    cdef int i = k - 1
    while i >= 0 and idx[i] == n - k + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    i += 1
    while i < k:
        idx[i] = idx[i - 1] + 1
        i += 1
    return True


cdef void _jacobi_eig(double* a, int k, double* w) noexcept nogil:
    """Eigenvalues of a symmetric k x k matrix (row-major, overwritten)."""
    cdef int sweep, p, q, r
    cdef double off, app, aqq, apq, theta, t, c, s, arp, arq
    for sweep in range(60):
        off = 0.0
        for p in range(k):
            for q in range(p + 1, k):
                off += a[p * k + q] * a[p * k + q]
        if off < 1e-30:
            break
        for p in range(k):
            for q in range(p + 1, k):
                apq = a[p * k + q]
                if fabs(apq) < 1e-300:
                    continue
                app = a[p * k + p]
                aqq = a[q * k + q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for r in range(k):
                    arp = a[r * k + p]
                    arq = a[r * k + q]
                    a[r * k + p] = c * arp - s * arq
                    a[r * k + q] = s * arp + c * arq
                for r in range(k):
                    arp = a[p * k + r]
                    arq = a[q * k + r]
                    a[p * k + r] = c * arp - s * arq
                    a[q * k + r] = s * arp + c * arq
    for p in range(k):
        w[p] = a[p * k + p]


def rip_extremes(double[:, ::1] gram, int k):
    """Max over k-subsets S of max(1 - sigma_min(Phi_S), sigma_max(Phi_S) - 1).

    ``gram`` is ``Phi^T Phi``.  Returns ``(delta, support)`` with the first
    maximizing support in lexicographic order.
    """
    cdef int n = gram.shape[0]
    cdef int idx[KMAX]
    cdef int best[KMAX]
    cdef double a[KMAX * KMAX]
    cdef double w[KMAX]
    cdef int i, j
    cdef double lo, hi, d, best_d = -1.0
    if k < 1 or k > KMAX or k > n:
        raise ValueError("k out of range")
    for i in range(k):
        idx[i] = i
    with nogil:
        while True:
            for i in range(k):
                for j in range(k):
                    a[i * k + j] = gram[idx[i], idx[j]]
            _jacobi_eig(a, k, w)
            lo = w[0]
            hi = w[0]
            for i in range(1, k):
                if w[i] < lo:
                    lo = w[i]
                if w[i] > hi:
                    hi = w[i]
            lo = sqrt(lo) if lo > 0 else 0.0
            hi = sqrt(hi) if hi > 0 else 0.0
            d = 1.0 - lo
            if hi - 1.0 > d:
                d = hi - 1.0
            if d > best_d:
                best_d = d
                for i in range(k):
                    best[i] = idx[i]
            if not _next_combination(idx, k, n):
                break
    return best_d, tuple(best[i] for i in range(k))


cdef bint _fit_support(double[:, ::1] phi, double[::1] y, int* idx, int k,
                       double* q, double* rmat, double* qty, double* res) noexcept nogil:
    """Modified Gram-Schmidt (two passes) on the columns idx; residual into res.

    Returns False when the columns are numerically dependent.
    """
    cdef int m = phi.shape[0]
    cdef int i, j, p, sweep
    cdef double dot, nrm, nrm0
    for j in range(k):
        nrm0 = 0.0
        for i in range(m):
            q[j * m + i] = phi[i, idx[j]]
            nrm0 += q[j * m + i] * q[j * m + i]
        for p in range(k):
            rmat[p * KMAX + j] = 0.0
        for sweep in range(2):
            for p in range(j):
                dot = 0.0
                for i in range(m):
                    dot += q[p * m + i] * q[j * m + i]
                rmat[p * KMAX + j] += dot
                for i in range(m):
                    q[j * m + i] -= dot * q[p * m + i]
        nrm = 0.0
        for i in range(m):
            nrm += q[j * m + i] * q[j * m + i]
        if nrm <= 1e-24 * nrm0 or nrm == 0.0:
            return False
        nrm = sqrt(nrm)
        rmat[j * KMAX + j] = nrm
        for i in range(m):
            q[j * m + i] /= nrm
    for i in range(m):
        res[i] = y[i]
    for sweep in range(2):
        for j in range(k):
            dot = 0.0
            for i in range(m):
                dot += q[j * m + i] * res[i]
            if sweep == 0:
                qty[j] = dot
            else:
                qty[j] += dot
            for i in range(m):
                res[i] -= dot * q[j * m + i]
    return True


def l0_search(double[:, ::1] phi, double[::1] y, int max_s, double feas_tol):
    """First support (by size, then lexicographic) whose least-squares fit
    leaves ``||y - Phi_S z|| <= feas_tol * ||y||``.  Returns ``(support, z)``
    or ``None``."""
    cdef int m = phi.shape[0]
    cdef int n = phi.shape[1]
    cdef int idx[KMAX]
    cdef double rmat[KMAX * KMAX]
    cdef double qty[KMAX]
    cdef double z[KMAX]
    cdef int k, i, j
    cdef double ny = 0.0, rn, acc
    cdef bint found = False
    if max_s < 1 or max_s > KMAX:
        raise ValueError("max_s out of range")
    q_arr = np.empty(KMAX * m)
    res_arr = np.empty(m)
    cdef double[::1] q = q_arr
    cdef double[::1] res = res_arr
    for i in range(m):
        ny += y[i] * y[i]
    ny = sqrt(ny)
    with nogil:
        for k in range(1, max_s + 1):
            if k > n:
                break
            for i in range(k):
                idx[i] = i
            while True:
                if _fit_support(phi, y, idx, k, &q[0], rmat, qty, &res[0]):
                    rn = 0.0
                    for i in range(m):
                        rn += res[i] * res[i]
                    if sqrt(rn) <= feas_tol * ny:
                        found = True
                        break
                if not _next_combination(idx, k, n):
                    break
            if found:
                break
    if not found:
        return None
    for i in range(k - 1, -1, -1):
        acc = qty[i]
        for j in range(i + 1, k):
            acc -= rmat[i * KMAX + j] * z[j]
        z[i] = acc / rmat[i * KMAX + i]
    return tuple(idx[i] for i in range(k)), np.array([z[i] for i in range(k)])

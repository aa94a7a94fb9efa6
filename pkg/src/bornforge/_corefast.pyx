"""Cython implementations of the hot kernels (see _corepure for the contract)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log

cnp.import_array()

BACKEND = "compiled"

cdef extern from *:
    """
    static inline int bf_popcount64(unsigned long long x) {
    #if defined(__GNUC__) || defined(__clang__)
        return __builtin_popcountll(x);
    #else
        int c = 0;
        while (x) { x &= x - 1; ++c; }
        return c;
    #endif
    }
    """
    int bf_popcount64(unsigned long long x) nogil


def hamming_matrix(xa, xb):
    cdef cnp.int64_t[::1] a = np.ascontiguousarray(xa, dtype=np.int64)
    cdef cnp.int64_t[::1] b = np.ascontiguousarray(xb, dtype=np.int64)
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], i, j
    out_arr = np.empty((na, nb), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    with nogil:
        for i in range(na):
            for j in range(nb):
                out[i, j] = bf_popcount64(<unsigned long long> (a[i] ^ b[j]))
    return out_arr


def phase_table(jmat, b):
    cdef double[:, ::1] J = np.ascontiguousarray(jmat, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = bv.shape[0], npairs = 0, i, j, k, q
    cdef cnp.int64_t x, size = (<cnp.int64_t> 1) << n

    # Collect nonzero couplings once; sparse J keeps the inner loop short.
    pairs_i = []
    pairs_j = []
    pairs_w = []
    for i in range(n):
        for j in range(i + 1, n):
            if J[i, j] != 0.0:
                pairs_i.append(i)
                pairs_j.append(j)
                pairs_w.append(J[i, j])
    cdef cnp.int64_t[::1] pi = np.asarray(pairs_i, dtype=np.int64).reshape(-1)
    cdef cnp.int64_t[::1] pj = np.asarray(pairs_j, dtype=np.int64).reshape(-1)
    cdef double[::1] pw = np.asarray(pairs_w, dtype=np.float64).reshape(-1)
    npairs = pi.shape[0]

    out_arr = np.empty(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc, zk
    cdef double[::1] z = np.empty(n, dtype=np.float64)
    with nogil:
        for x in range(size):
            acc = 0.0
            for k in range(n):
                zk = 1.0 - 2.0 * <double> ((x >> k) & 1)
                z[k] = zk
                acc += bv[k] * zk
            for q in range(npairs):
                acc += pw[q] * z[pi[q]] * z[pj[q]]
            out[x] = acc
    return out_arr


cdef inline double _lse_row(double[::1] buf, Py_ssize_t m) nogil:
    cdef double mx = buf[0], s = 0.0
    cdef Py_ssize_t k
    for k in range(1, m):
        if buf[k] > mx:
            mx = buf[k]
    for k in range(m):
        s += exp(buf[k] - mx)
    return mx + log(s)


def sinkhorn_cross(logp, logq, cmat, double eps, long max_iters, double tol):
    cdef double[::1] lp = np.ascontiguousarray(logp, dtype=np.float64)
    cdef double[::1] lq = np.ascontiguousarray(logq, dtype=np.float64)
    cdef double[:, ::1] C = np.ascontiguousarray(cmat, dtype=np.float64)
    cdef Py_ssize_t P = lp.shape[0], Q = lq.shape[0], i, j
    f_arr = np.zeros(P, dtype=np.float64)
    g_arr = np.zeros(Q, dtype=np.float64)
    cdef double[::1] f = f_arr
    cdef double[::1] g = g_arr
    cdef double[::1] rowbuf = np.empty(Q, dtype=np.float64)
    cdef double[::1] colbuf = np.empty(P, dtype=np.float64)
    cdef double delta, fn, gn
    cdef long it = 0
    cdef bint converged = False
    with nogil:
        while it < max_iters:
            it += 1
            delta = 0.0
            for i in range(P):
                for j in range(Q):
                    rowbuf[j] = lq[j] + (g[j] - C[i, j]) / eps
                fn = -eps * _lse_row(rowbuf, Q)
                if fabs(fn - f[i]) > delta:
                    delta = fabs(fn - f[i])
                f[i] = fn
            for j in range(Q):
                for i in range(P):
                    colbuf[i] = lp[i] + (f[i] - C[i, j]) / eps
                gn = -eps * _lse_row(colbuf, P)
                if fabs(gn - g[j]) > delta:
                    delta = fabs(gn - g[j])
                g[j] = gn
            if delta < tol:
                converged = True
                break
    return f_arr, g_arr, it, converged


def sinkhorn_auto(logw, cmat, double eps, long max_iters, double tol):
    cdef double[::1] lw = np.ascontiguousarray(logw, dtype=np.float64)
    cdef double[:, ::1] C = np.ascontiguousarray(cmat, dtype=np.float64)
    cdef Py_ssize_t P = lw.shape[0], i, j
    s_arr = np.zeros(P, dtype=np.float64)
    cdef double[::1] s = s_arr
    cdef double[::1] s_new = np.empty(P, dtype=np.float64)
    cdef double[::1] rowbuf = np.empty(P, dtype=np.float64)
    cdef double delta, val
    cdef long it = 0
    cdef bint converged = False
    with nogil:
        while it < max_iters:
            it += 1
            delta = 0.0
            for i in range(P):
                for j in range(P):
                    rowbuf[j] = lw[j] + (s[j] - C[i, j]) / eps
                s_new[i] = 0.5 * (s[i] - eps * _lse_row(rowbuf, P))
            for i in range(P):
                val = fabs(s_new[i] - s[i])
                if val > delta:
                    delta = val
                s[i] = s_new[i]
            if delta < tol:
                converged = True
                break
    return s_arr, it, converged

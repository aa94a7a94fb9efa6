"""NumPy implementations of the hot kernels.

Mirrors the signatures of the Cython module ``_corefast``; one of the two is
re-exported by ``_core`` at import time.  Everything here operates on plain
arrays so both backends can be tested against each other.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

BACKEND = "pure"


def hamming_matrix(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distances between two arrays of bit codes."""
    xa = np.asarray(xa, dtype=np.int64)
    xb = np.asarray(xb, dtype=np.int64)
    return np.bitwise_count(xa[:, None] ^ xb[None, :]).astype(np.int64)


def phase_table(jmat: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Diagonal phases sum_{i<j} J_ij z_i z_j + sum_k b_k z_k for all codes.

    z_k = +1 for bit 0 and -1 for bit 1; qubit k is bit k of the basis index.
    """
    b = np.asarray(b, dtype=np.float64)
    n = b.shape[0]
    idx = np.arange(1 << n, dtype=np.int64)
    z = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)
    phase = z @ b
    for i in range(n):
        for j in range(i + 1, n):
            w = jmat[i, j]
            if w != 0.0:
                phase += w * z[:, i] * z[:, j]
    return phase


def sinkhorn_cross(
    logp: np.ndarray,
    logq: np.ndarray,
    cmat: np.ndarray,
    eps: float,
    max_iters: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """Alternating log-domain dual updates for the cross transport problem.

    Returns (f, g, iterations_used, converged); f is indexed by the rows of
    ``cmat`` (support of p), g by the columns (support of q).
    """
    p_len = logp.shape[0]
    q_len = logq.shape[0]
    f = np.zeros(p_len)
    g = np.zeros(q_len)
    it = 0
    converged = False
    while it < max_iters:
        it += 1
        f_new = -eps * logsumexp(logq[None, :] + (g[None, :] - cmat) / eps, axis=1)
        g_new = -eps * logsumexp(logp[:, None] + (f_new[:, None] - cmat) / eps, axis=0)
        delta = max(np.max(np.abs(f_new - f)), np.max(np.abs(g_new - g)))
        f, g = f_new, g_new
        if delta < tol:
            converged = True
            break
    return f, g, it, converged


def sinkhorn_auto(
    logw: np.ndarray,
    cmat: np.ndarray,
    eps: float,
    max_iters: int,
    tol: float,
) -> tuple[np.ndarray, int, bool]:
    """Halved fixed-point iteration for the symmetric (auto) potential."""
    s = np.zeros(logw.shape[0])
    it = 0
    converged = False
    while it < max_iters:
        it += 1
        lse = logsumexp(logw[None, :] + (s[None, :] - cmat) / eps, axis=1)
        s_new = 0.5 * (s - eps * lse)
        delta = np.max(np.abs(s_new - s))
        s = s_new
        if delta < tol:
            converged = True
            break
    return s, it, converged

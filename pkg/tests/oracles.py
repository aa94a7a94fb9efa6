"""Independent reference implementations used to check the package.

Everything here is deliberately written the slow, obvious way (dense
matrices, explicit loops, series expansions) so that agreement with the
package is meaningful.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def kron_chain(mats) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def one_qubit_on(n: int, k: int, u: np.ndarray) -> np.ndarray:
    """Embed a 2x2 operator on qubit k, where qubit 0 indexes the lowest bit."""
    mats = [u if q == k else np.eye(2, dtype=complex) for q in range(n - 1, -1, -1)]
    return kron_chain(mats)


def dense_hadamard_layer(n: int) -> np.ndarray:
    return kron_chain([HADAMARD] * n)


def dense_ising(n: int, j: np.ndarray, b: np.ndarray) -> np.ndarray:
    """exp(i H_z) for the diagonal two-body Hamiltonian, via eigenphases."""
    dim = 1 << n
    phases = np.zeros(dim)
    for code in range(dim):
        z = [1.0 - 2.0 * ((code >> k) & 1) for k in range(n)]
        val = 0.0
        for i in range(n):
            val += b[i] * z[i]
            for jq in range(i + 1, n):
                val += j[i, jq] * z[i] * z[jq]
        phases[code] = val
    return np.diag(np.exp(1j * phases))


def dense_final_layer(n: int, gamma, delta, sigma) -> np.ndarray:
    gamma, delta, sigma = (np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in (gamma, delta, sigma))
    mats = []
    for k in range(n - 1, -1, -1):
        gen = gamma[k] * PAULI_X + delta[k] * PAULI_Y + sigma[k] * PAULI_Z
        mats.append(expm(1j * gen))
    return kron_chain(mats)


def dense_circuit_probs(n: int, j, b, gamma, delta, sigma) -> np.ndarray:
    """Output distribution of the full circuit via dense matrix products."""
    dim = 1 << n
    ket0 = np.zeros(dim, dtype=complex)
    ket0[0] = 1.0
    u = dense_final_layer(n, gamma, delta, sigma) @ dense_ising(n, np.asarray(j), np.asarray(b)) @ dense_hadamard_layer(n)
    amps = u @ ket0
    return np.abs(amps) ** 2


def taylor_gate(gamma: float, delta: float, sigma: float, terms: int = 60) -> np.ndarray:
    """Series summation of exp(i (gamma X + delta Y + sigma Z))."""
    a = 1j * (gamma * PAULI_X + delta * PAULI_Y + sigma * PAULI_Z)
    out = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def fd_derivative(f, x: float, h: float = 1e-5):
    """Central finite difference of a scalar-to-anything function."""
    return (f(x + h) - f(x - h)) / (2.0 * h)


def hamming(a: int, b: int) -> int:
    return bin(a ^ b).count("1")


def random_simplex(rng: np.random.Generator, dim: int, floor: float = 0.0) -> np.ndarray:
    p = rng.dirichlet(np.ones(dim)) + floor
    return p / p.sum()


def exact_score_table(probs: np.ndarray, n: int) -> np.ndarray:
    """s_i(x) = 1 - pi(flip_i x) / pi(x) for every outcome and bit."""
    dim = 1 << n
    out = np.zeros((dim, n))
    for code in range(dim):
        for i in range(n):
            out[code, i] = 1.0 - probs[code ^ (1 << i)] / probs[code]
    return out


def stein_kernel_reference(x: int, y: int, probs: np.ndarray, n: int, base_kernel) -> float:
    """Steinalized kernel built bit by bit from the difference operator.

    Per bit i the operator is (A_i f)(x) = s_i(x) f(x) - (f(x) - f(flip_i x));
    the kernel is the sum over bits of A_i applied in both arguments.
    """
    s = exact_score_table(probs, n)
    total = 0.0
    for i in range(n):
        xf, yf = x ^ (1 << i), y ^ (1 << i)
        total += s[x, i] * s[y, i] * base_kernel(x, y)
        total -= s[x, i] * (base_kernel(x, y) - base_kernel(x, yf))
        total -= s[y, i] * (base_kernel(x, y) - base_kernel(xf, y))
        total += base_kernel(x, y) - base_kernel(xf, y) - base_kernel(x, yf) + base_kernel(xf, yf)
    return float(total)


def mmd_reference(p: np.ndarray, q: np.ndarray, kmat: np.ndarray) -> float:
    """Expanded double sum, no matrix shortcuts."""
    total = 0.0
    for a in range(len(p)):
        for b in range(len(p)):
            total += (p[a] - q[a]) * (p[b] - q[b]) * kmat[a, b]
    return float(total)


def ot_reference(p: np.ndarray, q: np.ndarray, cost: np.ndarray) -> float:
    """Exact optimal transport via the scipy linear programming solver."""
    from scipy.optimize import linprog

    m, k = len(p), len(q)
    a_eq = np.zeros((m + k, m * k))
    for i in range(m):
        a_eq[i, i * k : (i + 1) * k] = 1.0
    for jj in range(k):
        a_eq[m + jj, jj::k] = 1.0
    res = linprog(
        cost.reshape(-1),
        A_eq=a_eq,
        b_eq=np.concatenate([p, q]),
        bounds=(0, None),
        method="highs",
    )
    assert res.success
    return float(res.fun)

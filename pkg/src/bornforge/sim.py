"""Dense statevector simulation of the Ising Born circuit family.

Circuits have the fixed layout |0...0> -> H on every qubit -> diagonal Ising
phase layer -> one local rotation per qubit -> computational-basis measurement.
Qubit k is bit k of the basis index (qubit 0 = least significant bit), and the
diagonal layer uses z_k = +1 for bit value 0.  Global phase is kept; nothing
downstream may depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from ._rng import as_generator
from .errors import CapacityError, ShapeError

MAX_QUBITS = 24


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the 2^n computational basis states."""

    n: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class ProbabilityVector:
    """Normalized Born probabilities over the 2^n outcomes."""

    n: int
    probs: np.ndarray


@dataclass(frozen=True)
class SampleSet:
    """Measurement outcomes stored as integer bit codes."""

    n: int
    codes: np.ndarray

    def __len__(self) -> int:
        return int(self.codes.shape[0])


def _check_qubit_count(n: int, cap: int) -> None:
    if not 1 <= n <= cap:
        raise CapacityError(f"qubit count {n} outside [1, {cap}]")


def _check_ising_args(n: int, jmat: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    jmat = np.asarray(jmat, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if jmat.shape != (n, n):
        raise ShapeError(f"coupling matrix shape {jmat.shape} != ({n}, {n})")
    if b.shape != (n,):
        raise ShapeError(f"local field shape {b.shape} != ({n},)")
    if np.max(np.abs(np.diagonal(jmat))) > 1e-12:
        raise ShapeError("coupling matrix must have zero diagonal")
    if np.max(np.abs(jmat - jmat.T)) > 1e-12:
        raise ShapeError("coupling matrix must be symmetric")
    return jmat, b


def _check_final_args(n: int, gamma, delta, sigma) -> np.ndarray:
    angles = np.stack(
        [
            np.asarray(gamma, dtype=np.float64),
            np.asarray(delta, dtype=np.float64),
            np.asarray(sigma, dtype=np.float64),
        ]
    )
    if angles.shape != (3, n):
        raise ShapeError(f"final-layer angle arrays must each have shape ({n},)")
    return angles


def init_plus_state(n: int, cap: int = MAX_QUBITS) -> StateVector:
    """Uniform superposition H^n |0...0>."""
    _check_qubit_count(n, cap)
    amp = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    return StateVector(n, amp)


def ising_phase_table(n: int, jmat, b) -> np.ndarray:
    """Phase angle applied to each basis state by the diagonal layer."""
    jmat, b = _check_ising_args(n, jmat, b)
    return _core.phase_table(jmat, b)


def apply_ising_diagonal(state: StateVector, jmat, b) -> StateVector:
    """Multiply each amplitude by exp(i * (sum_{i<j} J_ij z_i z_j + sum_k b_k z_k))."""
    phases = ising_phase_table(state.n, jmat, b)
    return StateVector(state.n, state.amplitudes * np.exp(1j * phases))


def _single_qubit_unitary(gamma: float, delta: float, sigma: float) -> np.ndarray:
    """Closed form of exp(i (gamma X + delta Y + sigma Z)); identity at zero angle."""
    theta = float(np.sqrt(gamma * gamma + delta * delta + sigma * sigma))
    if theta == 0.0:
        return np.eye(2, dtype=np.complex128)
    nx, ny, nz = gamma / theta, delta / theta, sigma / theta
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [c + 1j * s * nz, s * ny + 1j * s * nx],
            [-s * ny + 1j * s * nx, c - 1j * s * nz],
        ],
        dtype=np.complex128,
    )


def _apply_one_qubit(amp: np.ndarray, n: int, k: int, u: np.ndarray) -> np.ndarray:
    shaped = amp.reshape(1 << (n - 1 - k), 2, 1 << k)
    a0 = shaped[:, 0, :]
    a1 = shaped[:, 1, :]
    out = np.empty_like(shaped)
    out[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    out[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    return out.reshape(amp.shape[0])


def apply_final_layer(state: StateVector, gamma, delta, sigma) -> StateVector:
    """Apply exp(i (gamma_k X_k + delta_k Y_k + sigma_k Z_k)) on every qubit."""
    angles = _check_final_args(state.n, gamma, delta, sigma)
    amp = state.amplitudes
    for k in range(state.n):
        u = _single_qubit_unitary(angles[0, k], angles[1, k], angles[2, k])
        amp = _apply_one_qubit(amp, state.n, k, u)
    return StateVector(state.n, amp)


def final_layer_unitary(k_angles: tuple[float, float, float]) -> np.ndarray:
    """The 2x2 matrix applied to one qubit by apply_final_layer."""
    return _single_qubit_unitary(*k_angles)


def hadamard_layer(state: StateVector) -> StateVector:
    """Exact H on every qubit (no global phase)."""
    h = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)
    amp = state.amplitudes
    for k in range(state.n):
        amp = _apply_one_qubit(amp, state.n, k, h)
    return StateVector(state.n, amp)


def born_probabilities(state: StateVector) -> ProbabilityVector:
    """Squared amplitude magnitudes, renormalized against rounding drift."""
    p = np.abs(state.amplitudes) ** 2
    total = p.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ShapeError("state has no probability mass")
    return ProbabilityVector(state.n, p / total)


def sample(pv: ProbabilityVector, count: int, seed) -> SampleSet:
    """Draw measurement outcomes; deterministic for a given seed."""
    if count < 0:
        raise ShapeError(f"sample count {count} must be nonnegative")
    rng = as_generator(seed)
    codes = rng.choice(pv.probs.shape[0], size=count, p=pv.probs)
    return SampleSet(pv.n, codes.astype(np.int64))


def code_to_string(code: int, n: int) -> str:
    """Render a bit code with qubit 0 leftmost."""
    return "".join("1" if (code >> k) & 1 else "0" for k in range(n))


def string_to_code(bits: str) -> int:
    code = 0
    for k, ch in enumerate(bits):
        if ch == "1":
            code |= 1 << k
        elif ch != "0":
            raise ShapeError(f"invalid bitstring character {ch!r}")
    return code


def codes_to_bits(codes: np.ndarray, n: int) -> np.ndarray:
    """Expand integer codes into an (M, n) 0/1 array, column k = qubit k."""
    codes = np.asarray(codes, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)

"""Kernels on bitstrings: Gaussian mixture, exponentiated Hamming, feature-map overlap.

Bitstrings travel as integer codes (qubit k = bit k); all kernels are symmetric
with values in [0, 1].  Gram assembly is the training hot loop, so matrices are
built over deduplicated codes and the feature-map evaluator caches statevectors
and sampled pair values across calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _core, sim
from ._rng import as_generator, spawn_seed
from .errors import ShapeError, UsageError

DEFAULT_BANDWIDTHS: tuple[float, ...] = (0.25, 10.0, 1000.0)
DEFAULT_SHOTS = 1024

ENCODING_LOCAL = np.pi / 4.0


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to evaluate and how.

    kind: "gaussian" (mixture of RBFs over bandwidths), "hamming"
    (exp(-H(x,y)/n)), or "quantum" (squared feature-map overlap, exact from
    statevectors or estimated from `shots` runs of the overlap circuit).
    """

    kind: str
    bandwidths: tuple[float, ...] = DEFAULT_BANDWIDTHS
    mode: str = "exact"
    shots: int = DEFAULT_SHOTS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "hamming", "quantum"):
            raise UsageError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and len(self.bandwidths) == 0:
            raise UsageError("gaussian kernel needs at least one bandwidth")
        if self.mode not in ("exact", "sampled"):
            raise UsageError(f"unknown kernel mode {self.mode!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise UsageError("sampled kernel needs a positive shot count")


@dataclass(frozen=True)
class GramMatrix:
    row_codes: np.ndarray
    col_codes: np.ndarray
    values: np.ndarray


def spec_to_dict(spec: KernelSpec) -> dict:
    return {
        "kind": spec.kind,
        "bandwidths": list(spec.bandwidths),
        "mode": spec.mode,
        "shots": spec.shots,
        "seed": spec.seed,
    }


def dict_to_spec(doc: dict) -> KernelSpec:
    return KernelSpec(
        kind=doc["kind"],
        bandwidths=tuple(doc.get("bandwidths", DEFAULT_BANDWIDTHS)),
        mode=doc.get("mode", "exact"),
        shots=int(doc.get("shots", DEFAULT_SHOTS)),
        seed=int(doc.get("seed", 0)),
    )


def gaussian_kernel(x: int, y: int, bandwidths=DEFAULT_BANDWIDTHS) -> float:
    """Mixture of Gaussians in the squared Euclidean (= Hamming) distance."""
    d = int(_core.hamming_matrix(np.array([x]), np.array([y]))[0, 0])
    return float(np.mean([np.exp(-d / (2.0 * s)) for s in bandwidths]))


def hamming_kernel(x: int, y: int, n: int) -> float:
    """exp(-H(x, y)/n)."""
    d = int(_core.hamming_matrix(np.array([x]), np.array([y]))[0, 0])
    return float(np.exp(-d / float(n)))


def _encoding_coefficients(code: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal-layer coefficients of the feature encoding of one bitstring."""
    bits = sim.codes_to_bits(np.array([code]), n)[0].astype(np.float64)
    local = ENCODING_LOCAL * bits
    shifted = ENCODING_LOCAL - bits
    pair = np.triu(np.outer(shifted, shifted), k=1)
    return pair + pair.T, local


def quantum_feature_state(code: int, n: int) -> sim.StateVector:
    """|Phi(x)> = U_enc(x) H^n U_enc(x) H^n |0...0>."""
    pair, local = _encoding_coefficients(code, n)
    state = sim.init_plus_state(n)
    state = sim.apply_ising_diagonal(state, pair, local)
    state = sim.hadamard_layer(state)
    return sim.apply_ising_diagonal(state, pair, local)


def _overlap_circuit_p0(x: int, y: int, n: int) -> float:
    """Pr[0...0] after U_enc(y)'s circuit followed by the inverse of U_enc(x)'s."""
    pair_y, local_y = _encoding_coefficients(y, n)
    pair_x, local_x = _encoding_coefficients(x, n)
    state = sim.init_plus_state(n)
    state = sim.apply_ising_diagonal(state, pair_y, local_y)
    state = sim.hadamard_layer(state)
    state = sim.apply_ising_diagonal(state, pair_y, local_y)
    state = sim.apply_ising_diagonal(state, -pair_x, -local_x)
    state = sim.hadamard_layer(state)
    state = sim.apply_ising_diagonal(state, -pair_x, -local_x)
    state = sim.hadamard_layer(state)
    return float(np.abs(state.amplitudes[0]) ** 2)


def quantum_kernel(x: int, y: int, n: int, spec: KernelSpec) -> float:
    """Squared overlap of the feature states of x and y."""
    if spec.kind != "quantum":
        raise UsageError("quantum_kernel needs a quantum KernelSpec")
    if spec.mode == "exact":
        vx = quantum_feature_state(x, n).amplitudes
        vy = quantum_feature_state(y, n).amplitudes
        return float(np.abs(np.vdot(vx, vy)) ** 2)
    # Sampled estimate: each unordered pair gets its own seed so that the
    # estimate is symmetric and reproducible; never-observed 0...0 gives 0.
    a, b = (x, y) if x <= y else (y, x)
    p0 = _overlap_circuit_p0(a, b, n)
    rng = as_generator(spawn_seed(spec.seed, a, b))
    return float(rng.binomial(spec.shots, p0) / spec.shots)


class KernelEvaluator:
    """Kernel of a fixed spec on n-bit codes, with caching for the quantum kind."""

    def __init__(self, spec: KernelSpec, n: int):
        self.spec = spec
        self.n = int(n)
        self._states: dict[int, np.ndarray] = {}
        self._pair_values: dict[tuple[int, int], float] = {}

    def _feature_matrix(self, codes: np.ndarray) -> np.ndarray:
        rows = []
        for c in codes:
            c = int(c)
            if c not in self._states:
                self._states[c] = quantum_feature_state(c, self.n).amplitudes
            rows.append(self._states[c])
        return np.array(rows)

    def _sampled_value(self, x: int, y: int) -> float:
        key = (x, y) if x <= y else (y, x)
        if key not in self._pair_values:
            self._pair_values[key] = quantum_kernel(key[0], key[1], self.n, self.spec)
        return self._pair_values[key]

    def matrix(self, codes_a, codes_b) -> np.ndarray:
        """Dense kernel values for every pair; deduplicates repeated codes."""
        codes_a = np.asarray(codes_a, dtype=np.int64)
        codes_b = np.asarray(codes_b, dtype=np.int64)
        ua, inv_a = np.unique(codes_a, return_inverse=True)
        ub, inv_b = np.unique(codes_b, return_inverse=True)
        spec = self.spec
        if spec.kind == "gaussian":
            d = _core.hamming_matrix(ua, ub).astype(np.float64)
            k = np.mean([np.exp(-d / (2.0 * s)) for s in spec.bandwidths], axis=0)
        elif spec.kind == "hamming":
            d = _core.hamming_matrix(ua, ub).astype(np.float64)
            k = np.exp(-d / float(self.n))
        elif spec.mode == "exact":
            va = self._feature_matrix(ua)
            vb = self._feature_matrix(ub)
            k = np.abs(va.conj() @ vb.T) ** 2
        else:
            k = np.empty((ua.shape[0], ub.shape[0]))
            for i, x in enumerate(ua):
                for j, y in enumerate(ub):
                    k[i, j] = self._sampled_value(int(x), int(y))
        return k[np.ix_(inv_a, inv_b)]

    def __call__(self, x: int, y: int) -> float:
        return float(self.matrix(np.array([x]), np.array([y]))[0, 0])


def gram(x_codes, y_codes, spec: KernelSpec, n: int, evaluator: KernelEvaluator | None = None) -> GramMatrix:
    """Gram block between two code collections (SampleSet or array)."""
    xc = x_codes.codes if isinstance(x_codes, sim.SampleSet) else np.asarray(x_codes, dtype=np.int64)
    yc = y_codes.codes if isinstance(y_codes, sim.SampleSet) else np.asarray(y_codes, dtype=np.int64)
    if xc.ndim != 1 or yc.ndim != 1:
        raise ShapeError("gram expects flat code arrays")
    ev = evaluator if evaluator is not None else KernelEvaluator(spec, n)
    return GramMatrix(xc, yc, ev.matrix(xc, yc))


def full_space_matrix(spec: KernelSpec, n: int, evaluator: KernelEvaluator | None = None) -> np.ndarray:
    """Kernel values on the whole 2^n x 2^n outcome grid."""
    codes = np.arange(1 << n, dtype=np.int64)
    ev = evaluator if evaluator is not None else KernelEvaluator(spec, n)
    return ev.matrix(codes, codes)

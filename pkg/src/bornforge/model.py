"""Parameterized circuit family, canonical parameter indexing, shift-rule gradients.

Gates carry their angle as exp(i * theta * PauliWord).  Under that convention
Born probabilities are degree-2 trigonometric polynomials in each angle, so the
exact shift rule evaluates the circuit at theta +/- pi/4:

    d p(z) / d theta = p[theta + pi/4](z) - p[theta - pi/4](z)

(a +/- pi/2 shift would multiply the gate by a full Pauli word and produce two
identical distributions).  Final-layer angles sit inside a summed exponent
exp(i(gamma X + delta Y + sigma Z)), so the rule is exact for such an angle only
when the other two entries on that qubit vanish; gradients refuse the rest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import sim
from .errors import ShapeError, UsageError

PARAM_SHIFT = np.pi / 4.0

IQP_ANGLE = np.pi / (2.0 * np.sqrt(2.0))

METHODS_FINAL_GAMMA = np.pi / 4.0


@dataclass(frozen=True)
class ParamIndex:
    """Names one scalar parameter: coupling(i,j), local(k), gamma/delta/sigma(k)."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("coupling", "local", "gamma", "delta", "sigma"):
            raise UsageError(f"unknown parameter kind {self.kind!r}")
        want = 2 if self.kind == "coupling" else 1
        if len(self.qubits) != want:
            raise UsageError(f"{self.kind} index needs {want} qubit position(s)")


@dataclass(frozen=True)
class CircuitParams:
    """Ising block (j, b) plus the per-qubit final-layer angles.

    trainable is a flat boolean mask over the canonical parameter order:
    couplings (i<j, row major), locals, gamma, delta, sigma.
    """

    n: int
    j: np.ndarray
    b: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    sigma: np.ndarray
    trainable: np.ndarray


def num_params(n: int) -> int:
    return n * (n - 1) // 2 + 4 * n


def param_indices(n: int) -> list[ParamIndex]:
    """Canonical flat enumeration of every parameter of an n-qubit circuit."""
    out = [ParamIndex("coupling", (i, j)) for i in range(n) for j in range(i + 1, n)]
    out += [ParamIndex("local", (k,)) for k in range(n)]
    for kind in ("gamma", "delta", "sigma"):
        out += [ParamIndex(kind, (k,)) for k in range(n)]
    return out


def flat_position(n: int, idx: ParamIndex) -> int:
    ncouple = n * (n - 1) // 2
    if idx.kind == "coupling":
        i, j = idx.qubits
        if not 0 <= i < j < n:
            raise UsageError(f"coupling index {idx.qubits} invalid for n={n}")
        return i * n - i * (i + 1) // 2 + (j - i - 1)
    (k,) = idx.qubits
    if not 0 <= k < n:
        raise UsageError(f"qubit position {k} invalid for n={n}")
    offset = {"local": 0, "gamma": 1, "delta": 2, "sigma": 3}[idx.kind]
    return ncouple + offset * n + k


def default_trainable(n: int) -> np.ndarray:
    """Couplings and locals train; the final layer stays frozen."""
    mask = np.zeros(num_params(n), dtype=bool)
    mask[: n * (n - 1) // 2 + n] = True
    return mask


def make_params(
    n: int,
    j=None,
    b=None,
    gamma=None,
    delta=None,
    sigma=None,
    trainable=None,
) -> CircuitParams:
    """Assemble validated CircuitParams; omitted blocks default to zero."""

    def vec(v) -> np.ndarray:
        arr = np.zeros(n) if v is None else np.array(v, dtype=np.float64)
        if np.ndim(arr) == 0:
            arr = np.full(n, float(arr))
        if arr.shape != (n,):
            raise ShapeError(f"expected length-{n} vector, got shape {arr.shape}")
        return arr

    jarr = np.zeros((n, n)) if j is None else np.array(j, dtype=np.float64)
    if jarr.shape != (n, n):
        raise ShapeError(f"coupling matrix shape {jarr.shape} != ({n}, {n})")
    if np.max(np.abs(jarr - jarr.T)) > 1e-12 or np.max(np.abs(np.diagonal(jarr))) > 1e-12:
        raise ShapeError("coupling matrix must be symmetric with zero diagonal")
    mask = default_trainable(n) if trainable is None else np.array(trainable, dtype=bool)
    if mask.shape != (num_params(n),):
        raise ShapeError(f"trainable mask must have length {num_params(n)}")
    return CircuitParams(n, jarr, vec(b), vec(gamma), vec(delta), vec(sigma), mask)


def get_entry(params: CircuitParams, idx: ParamIndex) -> float:
    if idx.kind == "coupling":
        i, j = idx.qubits
        return float(params.j[i, j])
    (k,) = idx.qubits
    block = {"local": params.b, "gamma": params.gamma, "delta": params.delta, "sigma": params.sigma}
    return float(block[idx.kind][k])


def set_entry(params: CircuitParams, idx: ParamIndex, value: float) -> CircuitParams:
    """Functional single-entry update; couplings stay symmetric."""
    if idx.kind == "coupling":
        i, j = idx.qubits
        jmat = params.j.copy()
        jmat[i, j] = value
        jmat[j, i] = value
        return replace(params, j=jmat)
    (k,) = idx.qubits
    field = {"local": "b", "gamma": "gamma", "delta": "delta", "sigma": "sigma"}[idx.kind]
    arr = getattr(params, field).copy()
    arr[k] = value
    return replace(params, **{field: arr})


def flatten(params: CircuitParams) -> np.ndarray:
    """Parameters in the canonical flat order."""
    n = params.n
    triu = params.j[np.triu_indices(n, k=1)]
    return np.concatenate([triu, params.b, params.gamma, params.delta, params.sigma])


def unflatten(n: int, flat: np.ndarray, trainable=None) -> CircuitParams:
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (num_params(n),):
        raise ShapeError(f"flat parameter vector must have length {num_params(n)}")
    ncouple = n * (n - 1) // 2
    jmat = np.zeros((n, n))
    jmat[np.triu_indices(n, k=1)] = flat[:ncouple]
    jmat = jmat + jmat.T
    rest = flat[ncouple:].reshape(4, n)
    return make_params(n, jmat, rest[0], rest[1], rest[2], rest[3], trainable)


def build_state(params: CircuitParams) -> sim.StateVector:
    state = sim.init_plus_state(params.n)
    state = sim.apply_ising_diagonal(state, params.j, params.b)
    return sim.apply_final_layer(state, params.gamma, params.delta, params.sigma)


def build_distribution(params: CircuitParams) -> sim.ProbabilityVector:
    """Born distribution of the circuit."""
    return sim.born_probabilities(build_state(params))


def iqp_params(n: int, j=None, b=None, trainable=None) -> CircuitParams:
    """Ising block plus the fixed final layer exp(i pi/(2 sqrt 2) (X + Z)) = iH."""
    return make_params(n, j, b, gamma=IQP_ANGLE, delta=0.0, sigma=IQP_ANGLE, trainable=trainable)


def qaoa_params(n: int, j=None, b=None, mixer_gamma: float = METHODS_FINAL_GAMMA, trainable=None) -> CircuitParams:
    """Depth-1 QAOA member: final layer exp(-i Gamma X_k) on every qubit."""
    return make_params(n, j, b, gamma=-float(mixer_gamma), delta=0.0, sigma=0.0, trainable=trainable)


def methods_ansatz(n: int, j=None, b=None, trainable=None) -> CircuitParams:
    """Training ansatz with the final layer frozen at gamma_k = +pi/4."""
    return make_params(n, j, b, gamma=METHODS_FINAL_GAMMA, delta=0.0, sigma=0.0, trainable=trainable)


HARD_ANGLE_FAMILIES = ("grid8", "odd_multiple", "irrational")


def random_hard_angles(count: int, family: str, seed, d: int | None = None) -> np.ndarray:
    """Draw angles from one of the hard instance families."""
    from ._rng import as_generator

    rng = as_generator(seed)
    if family == "grid8":
        return rng.integers(0, 8, size=count) * (np.pi / 8.0)
    if family == "odd_multiple":
        if d is None or d < 1:
            raise UsageError("odd_multiple family needs a positive denominator d")
        l = rng.integers(0, 8 * d, size=count)
        return (2 * l + 1) * np.pi / (8.0 * d)
    if family == "irrational":
        return 2.0 * np.pi * rng.random(size=count)
    raise UsageError(f"unknown hard-angle family {family!r}")


def random_hard_init(
    n: int,
    family: str,
    seed,
    d: int | None = None,
    final_gamma: float = METHODS_FINAL_GAMMA,
    trainable=None,
) -> CircuitParams:
    """Fully connected Ising block drawn from a hard-angle family, frozen final layer."""
    ncouple = n * (n - 1) // 2
    angles = random_hard_angles(ncouple + n, family, seed, d)
    jmat = np.zeros((n, n))
    jmat[np.triu_indices(n, k=1)] = angles[:ncouple]
    jmat = jmat + jmat.T
    return make_params(n, jmat, angles[ncouple:], gamma=final_gamma, delta=0.0, sigma=0.0, trainable=trainable)


def snap_to_odd_lattice(values: np.ndarray, d: int) -> np.ndarray:
    """Nearest odd multiple of pi/(8d) for each value."""
    step = np.pi / (8.0 * d)
    l = np.rint((np.asarray(values, dtype=np.float64) / step - 1.0) / 2.0)
    return (2.0 * l + 1.0) * step


def on_odd_lattice(values: np.ndarray, d: int, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(np.asarray(values) - snap_to_odd_lattice(values, d))) <= tol)


def _require_trainable(params: CircuitParams, idx: ParamIndex) -> None:
    if not bool(params.trainable[flat_position(params.n, idx)]):
        raise UsageError(f"parameter {idx.kind}{idx.qubits} is not trainable")


def _require_shift_exact(params: CircuitParams, idx: ParamIndex) -> None:
    """Final-layer angles share a summed exponent; siblings must vanish."""
    if idx.kind in ("coupling", "local"):
        return
    (k,) = idx.qubits
    siblings = {
        "gamma": (params.delta[k], params.sigma[k]),
        "delta": (params.gamma[k], params.sigma[k]),
        "sigma": (params.gamma[k], params.delta[k]),
    }[idx.kind]
    if max(abs(siblings[0]), abs(siblings[1])) > 1e-12:
        raise UsageError(
            f"shift rule is not exact for {idx.kind}{idx.qubits}: "
            "the other final-layer angles on that qubit are nonzero"
        )


def shifted_params(params: CircuitParams, idx: ParamIndex, sign: int) -> CircuitParams:
    """The auxiliary circuit with entry idx moved by sign * pi/4."""
    if sign not in (-1, 1):
        raise UsageError(f"shift sign must be +1 or -1, got {sign}")
    _require_trainable(params, idx)
    return set_entry(params, idx, get_entry(params, idx) + sign * PARAM_SHIFT)


def prob_gradient(params: CircuitParams, idx: ParamIndex) -> np.ndarray:
    """Exact d p(z) / d theta_idx for every outcome z, via the shift rule."""
    _require_trainable(params, idx)
    _require_shift_exact(params, idx)
    up = build_distribution(shifted_params(params, idx, +1))
    down = build_distribution(shifted_params(params, idx, -1))
    return up.probs - down.probs


def shift_pair_distributions(params: CircuitParams, idx: ParamIndex) -> tuple[sim.ProbabilityVector, sim.ProbabilityVector]:
    """(plus-shift, minus-shift) Born distributions used by the cost gradients."""
    _require_trainable(params, idx)
    _require_shift_exact(params, idx)
    up = build_distribution(shifted_params(params, idx, +1))
    down = build_distribution(shifted_params(params, idx, -1))
    return up, down


def params_to_dict(params: CircuitParams) -> dict:
    return {
        "n": params.n,
        "j": params.j.tolist(),
        "b": params.b.tolist(),
        "gamma": params.gamma.tolist(),
        "delta": params.delta.tolist(),
        "sigma": params.sigma.tolist(),
        "trainable": [bool(t) for t in params.trainable],
    }


def dict_to_params(doc: dict) -> CircuitParams:
    try:
        return make_params(
            int(doc["n"]),
            doc["j"],
            doc["b"],
            doc["gamma"],
            doc["delta"],
            doc["sigma"],
            doc.get("trainable"),
        )
    except KeyError as missing:
        raise ShapeError(f"parameter document is missing field {missing}") from None


def params_to_json(params: CircuitParams) -> str:
    return json.dumps(params_to_dict(params), indent=2, sort_keys=True)


def json_to_params(text: str) -> CircuitParams:
    return dict_to_params(json.loads(text))

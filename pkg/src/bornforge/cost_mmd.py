"""Maximum mean discrepancy: exact value, unbiased estimate, shift-rule gradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model, sim
from ._rng import split_seeds
from .data import to_weighted_support
from .errors import ShapeError, UsageError
from .kernels import KernelEvaluator, KernelSpec, full_space_matrix


@dataclass(frozen=True)
class CostValue:
    """A scalar training cost plus the sample counts behind it."""

    value: float
    n_model_samples: int
    n_data_samples: int
    converged: bool = True


def _evaluator(spec: KernelSpec, n: int, evaluator: KernelEvaluator | None) -> KernelEvaluator:
    return evaluator if evaluator is not None else KernelEvaluator(spec, n)


def mmd_exact_from_matrix(p: sim.ProbabilityVector, q: sim.ProbabilityVector, kmat: np.ndarray) -> float:
    """delta^T K delta for delta = p - q over the full outcome space."""
    if p.n != q.n:
        raise ShapeError("distributions live on different qubit counts")
    delta = p.probs - q.probs
    return float(delta @ kmat @ delta)


def mmd_exact(
    p: sim.ProbabilityVector,
    q: sim.ProbabilityVector,
    spec: KernelSpec,
    evaluator: KernelEvaluator | None = None,
) -> float:
    """Population MMD^2 between two exact distributions."""
    return mmd_exact_from_matrix(p, q, full_space_matrix(spec, p.n, _evaluator(spec, p.n, evaluator)))


def mmd_estimate(
    x: sim.SampleSet,
    y: sim.SampleSet,
    spec: KernelSpec,
    evaluator: KernelEvaluator | None = None,
) -> CostValue:
    """Unbiased U-statistic estimate from model samples x and data samples y."""
    n_x, n_y = len(x), len(y)
    if n_x < 2 or n_y < 2:
        raise UsageError("unbiased MMD estimate needs at least two samples per side")
    ev = _evaluator(spec, x.n, evaluator)
    ex, ey = to_weighted_support(x), to_weighted_support(y)
    cx, cy = ex.weights * n_x, ey.weights * n_y
    kxx = ev.matrix(ex.codes, ex.codes)
    kyy = ev.matrix(ey.codes, ey.codes)
    kxy = ev.matrix(ex.codes, ey.codes)
    term_x = (cx @ kxx @ cx - cx @ np.diagonal(kxx)) / (n_x * (n_x - 1))
    term_y = (cy @ kyy @ cy - cy @ np.diagonal(kyy)) / (n_y * (n_y - 1))
    cross = (cx @ kxy @ cy) / (n_x * n_y)
    return CostValue(float(term_x + term_y - 2.0 * cross), n_x, n_y)


def _mean_kernel(ev: KernelEvaluator, a, b) -> float:
    wa, wb = to_weighted_support(a), to_weighted_support(b)
    return float(wa.weights @ ev.matrix(wa.codes, wb.codes) @ wb.weights)


def mmd_gradient(
    params: model.CircuitParams,
    idx: model.ParamIndex,
    x: sim.SampleSet,
    y: sim.SampleSet,
    spec: KernelSpec,
    seed,
    n_shift: int | None = None,
    evaluator: KernelEvaluator | None = None,
) -> float:
    """Sampled d MMD^2 / d theta_idx via the two shifted circuits."""
    ev = _evaluator(spec, params.n, evaluator)
    count = len(x) if n_shift is None else int(n_shift)
    up_pv, dn_pv = model.shift_pair_distributions(params, idx)
    seed_up, seed_dn = split_seeds(seed, 2)
    a = sim.sample(up_pv, count, seed_up)
    b = sim.sample(dn_pv, count, seed_dn)
    return 2.0 * (
        _mean_kernel(ev, a, x)
        - _mean_kernel(ev, b, x)
        - _mean_kernel(ev, a, y)
        + _mean_kernel(ev, b, y)
    )


def mmd_gradient_exact(
    params: model.CircuitParams,
    idx: model.ParamIndex,
    target: sim.ProbabilityVector,
    spec: KernelSpec,
    evaluator: KernelEvaluator | None = None,
) -> float:
    """Population gradient with every sample mean replaced by an expectation."""
    ev = _evaluator(spec, params.n, evaluator)
    kmat = full_space_matrix(spec, params.n, ev)
    up_pv, dn_pv = model.shift_pair_distributions(params, idx)
    p = model.build_distribution(params)
    return float(2.0 * (up_pv.probs - dn_pv.probs) @ kmat @ (p.probs - target.probs))

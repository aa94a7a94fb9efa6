"""Entropy-regularized optimal transport cost on bitstring distributions.

Ground metric is the Hamming (l1) distance.  The divergence is the debiased
combination OT_eps(p, q) - (OT_eps(p, p) + OT_eps(q, q))/2, computed from
log-domain dual potentials: f/g solve the cross problem by alternating softmin
updates, s/t solve each autocorrelation problem by the halved fixed point.
All updates run over weighted supports, so sample sets and exact distributions
share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from . import _core, model, sim
from ._rng import split_seeds
from .cost_mmd import CostValue
from .data import WeightedSupport, to_weighted_support
from .errors import CapacityError, UsageError

DEFAULT_EPSILON = 0.1
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 5000

EXACT_OT_SUPPORT_CAP = 64


@dataclass(frozen=True)
class Potentials:
    """Dual potentials of one divergence evaluation.

    f, s live on the support of the first argument; g, t on the second.
    iterations_used counts full sweeps across all three subproblems.
    """

    f: np.ndarray
    g: np.ndarray
    s: np.ndarray
    t: np.ndarray
    iterations_used: int
    converged: bool


@dataclass(frozen=True)
class SinkhornState:
    """Supports plus converged potentials, reusable by the gradient."""

    p: WeightedSupport
    q: WeightedSupport
    eps: float
    potentials: Potentials


def scaled_epsilon(n: int) -> float:
    """The n^2-scaling preset for the regularization strength."""
    return float(n * n)


def effective_max_iters(eps: float, max_iters: int) -> int:
    """Small eps converges slowly; scale the iteration budget up."""
    if eps >= 0.1:
        return int(max_iters)
    return int(max_iters * math.ceil(0.1 / eps))


def cost_matrix(codes_a, codes_b) -> np.ndarray:
    """Pairwise Hamming distances as floats."""
    codes_a = np.asarray(codes_a, dtype=np.int64)
    codes_b = np.asarray(codes_b, dtype=np.int64)
    return _core.hamming_matrix(codes_a, codes_b).astype(np.float64)


def _check_eps(eps: float) -> float:
    if not eps > 0.0:
        raise UsageError(f"regularization strength must be positive, got {eps}")
    return float(eps)


def sinkhorn_potentials(
    p: WeightedSupport,
    q: WeightedSupport,
    eps: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> Potentials:
    """Solve the cross problem and both autocorrelation problems."""
    eps = _check_eps(eps)
    budget = effective_max_iters(eps, max_iters)
    logp = np.log(p.weights)
    logq = np.log(q.weights)
    c_pq = cost_matrix(p.codes, q.codes)
    f, g, it_cross, ok_cross = _core.sinkhorn_cross(logp, logq, c_pq, eps, budget, tol)
    s, it_p, ok_p = _core.sinkhorn_auto(logp, cost_matrix(p.codes, p.codes), eps, budget, tol)
    t, it_q, ok_q = _core.sinkhorn_auto(logq, cost_matrix(q.codes, q.codes), eps, budget, tol)
    return Potentials(f, g, s, t, int(max(it_cross, it_p, it_q)), bool(ok_cross and ok_p and ok_q))


def regularized_ot(
    p: WeightedSupport,
    q: WeightedSupport,
    eps: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> tuple[float, bool]:
    """OT_eps(p, q) = <p, f> + <q, g> at the converged duals."""
    eps = _check_eps(eps)
    budget = effective_max_iters(eps, max_iters)
    f, g, _, ok = _core.sinkhorn_cross(
        np.log(p.weights), np.log(q.weights), cost_matrix(p.codes, q.codes), eps, budget, tol
    )
    return float(p.weights @ f + q.weights @ g), bool(ok)


def plan_from_potentials(p: WeightedSupport, q: WeightedSupport, f: np.ndarray, g: np.ndarray, eps: float) -> np.ndarray:
    """Primal coupling implied by dual potentials; marginals check convergence."""
    c_pq = cost_matrix(p.codes, q.codes)
    return p.weights[:, None] * q.weights[None, :] * np.exp((f[:, None] + g[None, :] - c_pq) / eps)


def divergence_state(
    x,
    y,
    eps: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> SinkhornState:
    p = to_weighted_support(x)
    q = to_weighted_support(y)
    if p.n != q.n:
        raise UsageError("supports live on different qubit counts")
    return SinkhornState(p, q, _check_eps(eps), sinkhorn_potentials(p, q, eps, max_iters, tol))


def divergence_from_state(state: SinkhornState) -> float:
    pot = state.potentials
    return float(state.p.weights @ (pot.f - pot.s) + state.q.weights @ (pot.g - pot.t))


def sinkhorn_divergence(
    x,
    y,
    eps: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> CostValue:
    """Debiased entropic divergence between two sample sets or distributions."""
    state = divergence_state(x, y, eps, max_iters, tol)
    return CostValue(
        divergence_from_state(state),
        len(x) if isinstance(x, sim.SampleSet) else 0,
        len(y) if isinstance(y, sim.SampleSet) else 0,
        state.potentials.converged,
    )


def dual_witness(state: SinkhornState, codes) -> np.ndarray:
    """phi(z): the divergence's first-variation, evaluable at any code.

    phi = (c-transform extension of g over q) minus (extension of s over p);
    at a support point of p it equals f - s.
    """
    codes = np.asarray(codes, dtype=np.int64)
    pot, eps = state.potentials, state.eps
    c_zq = cost_matrix(codes, state.q.codes)
    c_zp = cost_matrix(codes, state.p.codes)
    cross = -eps * logsumexp(np.log(state.q.weights)[None, :] + (pot.g[None, :] - c_zq) / eps, axis=1)
    auto = -eps * logsumexp(np.log(state.p.weights)[None, :] + (pot.s[None, :] - c_zp) / eps, axis=1)
    return cross - auto


def sinkhorn_gradient(
    params: model.CircuitParams,
    idx: model.ParamIndex,
    x,
    y,
    eps: float = DEFAULT_EPSILON,
    seed=0,
    n_shift: int | None = None,
    state: SinkhornState | None = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> float:
    """Sampled d/d theta of the divergence: mean phi over the two shifted circuits."""
    if state is None:
        state = divergence_state(x, y, eps, max_iters, tol)
    count = (len(x) if isinstance(x, sim.SampleSet) else len(state.p.codes)) if n_shift is None else int(n_shift)
    up_pv, dn_pv = model.shift_pair_distributions(params, idx)
    seed_up, seed_dn = split_seeds(seed, 2)
    a = to_weighted_support(sim.sample(up_pv, count, seed_up))
    b = to_weighted_support(sim.sample(dn_pv, count, seed_dn))
    return float(a.weights @ dual_witness(state, a.codes) - b.weights @ dual_witness(state, b.codes))


def sinkhorn_gradient_exact(
    params: model.CircuitParams,
    idx: model.ParamIndex,
    target: sim.ProbabilityVector,
    eps: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    state: SinkhornState | None = None,
) -> float:
    """Population gradient: sum_z phi(z) dp(z)/d theta."""
    if state is None:
        state = divergence_state(model.build_distribution(params), target, eps, max_iters, tol)
    up_pv, dn_pv = model.shift_pair_distributions(params, idx)
    codes = np.arange(1 << params.n, dtype=np.int64)
    return float((up_pv.probs - dn_pv.probs) @ dual_witness(state, codes))


def exact_ot(p, q) -> float:
    """Unregularized optimal transport under the Hamming metric (LP oracle)."""
    p = to_weighted_support(p)
    q = to_weighted_support(q)
    np_, nq = len(p.codes), len(q.codes)
    if np_ > EXACT_OT_SUPPORT_CAP or nq > EXACT_OT_SUPPORT_CAP:
        raise CapacityError(f"exact OT limited to supports of {EXACT_OT_SUPPORT_CAP} points")
    cmat = cost_matrix(p.codes, q.codes)
    a_eq = []
    for i in range(np_):
        row = np.zeros((np_, nq))
        row[i, :] = 1.0
        a_eq.append(row.ravel())
    for j in range(nq):
        col = np.zeros((np_, nq))
        col[:, j] = 1.0
        a_eq.append(col.ravel())
    b_eq = np.concatenate([p.weights, q.weights])
    res = linprog(cmat.ravel(), A_eq=np.array(a_eq), b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise UsageError(f"transport LP failed: {res.message}")
    return float(res.fun)


def gap_bound(eps: float, n: int) -> float | None:
    """Upper bound on OT_eps - OT_0 for the n-bit Hamming geometry.

    None when eps exceeds n e^2, where the bound's logarithm turns negative
    and the guarantee does not apply.
    """
    eps = _check_eps(eps)
    if eps > n * math.e**2:
        return None
    return 2.0 * eps * math.log(math.e**2 * n / eps)

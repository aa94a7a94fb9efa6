"""Discrete Stein discrepancy cost and its score-function estimators.

The difference operator is (Delta f)(x)_i = f(x) - f(flip_i x) and the score of
a distribution pi is s_i(x) = 1 - pi(flip_i x)/pi(x).  The Steinalized kernel

    k_pi(x,y) = s(x).s(y) k(x,y) - sum_i s_i(x) [k(x,y) - k(x, flip_i y)]
              - sum_i s_i(y) [k(x,y) - k(flip_i x, y)]
              + sum_i [k(x,y) - k(x, flip_i y) - k(flip_i x, y) + k(flip_i x, flip_i y)]

has zero expectation under pi in either slot, which the identity tests exercise.
Besides the exact score there are two estimators fitted from samples of pi: a
ridge regression defined only at its sample points, and a Nystrom eigenbasis
expansion defined everywhere.
"""

from __future__ import annotations

import numpy as np

from . import model, sim
from ._rng import split_seeds
from .cost_mmd import CostValue
from .data import to_weighted_support
from .errors import ScoreUndefinedError, ShapeError, UsageError
from .kernels import KernelEvaluator, KernelSpec

DEFAULT_RIDGE = 0.01


def flip(code: int, i: int) -> int:
    """Involution negating bit i."""
    return int(code) ^ (1 << i)


def flip_codes(codes: np.ndarray, i: int) -> np.ndarray:
    return np.asarray(codes, dtype=np.int64) ^ (1 << i)


def default_eigenvector_count(n: int) -> int:
    return {3: 3, 4: 6}.get(n, min(2**n, 6))


def exact_score(pv: sim.ProbabilityVector, code: int) -> np.ndarray:
    """Score vector of an explicit distribution at one point."""
    return ExactScore(pv).scores(np.array([code]))[0]


class ExactScore:
    """s_i(x) = 1 - pi(flip_i x)/pi(x) from an explicit probability vector."""

    method = "exact"
    data_count = 0

    def __init__(self, pv: sim.ProbabilityVector):
        self.n = pv.n
        self._probs = pv.probs

    def defined_mask(self, codes: np.ndarray) -> np.ndarray:
        return self._probs[np.asarray(codes, dtype=np.int64)] > 0.0

    def scores(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        base = self._probs[codes]
        if np.any(base <= 0.0):
            bad = codes[base <= 0.0][0]
            raise ScoreUndefinedError(f"score undefined at zero-probability outcome {int(bad)}")
        cols = [1.0 - self._probs[flip_codes(codes, i)] / base for i in range(self.n)]
        return np.stack(cols, axis=1)


class IdentityScore:
    """Ridge-regression score; defined only at the codes it was fitted on."""

    method = "identity"

    def __init__(self, n: int, codes: np.ndarray, rows: np.ndarray):
        self.n = n
        self.data_count = int(codes.shape[0])
        self._rows = {}
        for c, r in zip(codes, rows):
            self._rows.setdefault(int(c), r)

    def defined_mask(self, codes: np.ndarray) -> np.ndarray:
        return np.array([int(c) in self._rows for c in codes], dtype=bool)

    def scores(self, codes: np.ndarray) -> np.ndarray:
        out = np.empty((len(codes), self.n))
        for k, c in enumerate(codes):
            row = self._rows.get(int(c))
            if row is None:
                raise ScoreUndefinedError(f"identity score has no value at unseen code {int(c)}")
            out[k] = row
        return out


class SpectralScore:
    """Nystrom eigenbasis score; evaluates at any code."""

    method = "spectral"

    def __init__(self, n: int, data_count: int, support: np.ndarray, coef: np.ndarray, beta: np.ndarray, evaluator: KernelEvaluator):
        self.n = n
        self.data_count = int(data_count)
        self._support = support
        self._coef = coef
        self._beta = beta
        self._ev = evaluator

    def defined_mask(self, codes: np.ndarray) -> np.ndarray:
        return np.ones(len(codes), dtype=bool)

    def basis(self, codes: np.ndarray) -> np.ndarray:
        """Nystrom extension psi_j at each code, shape (len(codes), J)."""
        return self._ev.matrix(codes, self._support) @ self._coef

    def scores(self, codes: np.ndarray) -> np.ndarray:
        return self.basis(codes) @ self._beta.T


def identity_score(
    samples,
    spec: KernelSpec,
    n: int,
    eta: float = DEFAULT_RIDGE,
    weights: np.ndarray | None = None,
    evaluator: KernelEvaluator | None = None,
) -> IdentityScore:
    """Fit scores at sample points by kernel ridge regression.

    With uniform weights this is G = M (K + eta I)^-1 <Delta, K> for the M
    given samples; explicit weights generalize the sample means so a full
    enumeration with exact probabilities recovers the exact score as eta -> 0.
    """
    codes = samples.codes if isinstance(samples, sim.SampleSet) else np.asarray(samples, dtype=np.int64)
    m = codes.shape[0]
    if m == 0:
        raise UsageError("identity score needs at least one sample")
    if eta < 0.0:
        raise UsageError("ridge strength must be nonnegative")
    ev = evaluator if evaluator is not None else KernelEvaluator(spec, n)
    if weights is None:
        w = np.full(m, 1.0 / m)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (m,) or np.any(w < 0.0):
            raise ShapeError("weights must be a nonnegative vector matching the samples")
        w = w / w.sum()
    kmat = ev.matrix(codes, codes)
    dk = np.empty((m, n))
    for i in range(n):
        kflip = ev.matrix(codes, flip_codes(codes, i))
        dk[:, i] = (kmat - kflip) @ w
    wmat = kmat * w[None, :] * w[:, None]
    lhs = wmat + (eta / (m * m)) * np.eye(m)
    rows = np.linalg.solve(lhs, w[:, None] * dk)
    return IdentityScore(n, codes, rows)


def spectral_score(
    samples,
    spec: KernelSpec,
    n: int,
    j_eig: int | None = None,
    evaluator: KernelEvaluator | None = None,
) -> SpectralScore:
    """Fit a score defined everywhere from the top-J kernel eigenfunctions.

    Eigenpairs come from the sample Gram matrix; the Nystrom formula extends
    eigenfunctions off-sample, and the expansion coefficients are sample means
    of the difference operator applied to each eigenfunction.
    """
    codes = samples.codes if isinstance(samples, sim.SampleSet) else np.asarray(samples, dtype=np.int64)
    m = codes.shape[0]
    j = default_eigenvector_count(n) if j_eig is None else int(j_eig)
    if j < 1:
        raise UsageError("eigenvector count must be positive")
    if j > m:
        raise UsageError(f"eigenvector count {j} exceeds sample count {m}")
    ev = evaluator if evaluator is not None else KernelEvaluator(spec, n)

    # The M x M sample Gram factors through the distinct codes: with S the
    # M x u membership indicator and D = diag(counts), its nonzero eigenpairs
    # are those of D^1/2 K_u D^1/2, and a unit eigenvector is S D^-1/2 w.
    # Everything below therefore works on the u distinct codes exactly.
    support, counts = np.unique(codes, return_counts=True)
    root_c = np.sqrt(counts.astype(np.float64))
    k_u = ev.matrix(support, support)
    vals, vecs = np.linalg.eigh(root_c[:, None] * k_u * root_c[None, :])
    lam = vals[::-1][:j]
    w = vecs[:, ::-1][:, :j]
    if lam.shape[0] < j or np.any(lam <= 0.0):
        raise UsageError("requested eigenvalues of the Gram matrix are not positive")
    # psi_j(z) = (sqrt(M)/lam_j) sum_m u_j[m] k(z, x^m) = sum_a coef[a, j] k(z, x_a)
    coef = np.sqrt(m) * root_c[:, None] * w / lam[None, :]
    score = SpectralScore(n, m, support, coef, np.zeros((n, j)), ev)
    psi_support = score.basis(support)
    beta = np.empty((n, j))
    wts = counts / m
    for i in range(n):
        psi_flip = score.basis(flip_codes(support, i))
        beta[i] = wts @ (psi_support - psi_flip)
    score._beta = beta
    return score


def stein_kernel_matrix(codes_a, codes_b, score, evaluator: KernelEvaluator) -> np.ndarray:
    """k_pi values for every pair of codes."""
    codes_a = np.asarray(codes_a, dtype=np.int64)
    codes_b = np.asarray(codes_b, dtype=np.int64)
    s_a = score.scores(codes_a)
    s_b = score.scores(codes_b)
    kmat = evaluator.matrix(codes_a, codes_b)
    out = (s_a @ s_b.T) * kmat
    for i in range(score.n):
        k_af = evaluator.matrix(codes_a, flip_codes(codes_b, i))
        k_fa = evaluator.matrix(flip_codes(codes_a, i), codes_b)
        k_ff = evaluator.matrix(flip_codes(codes_a, i), flip_codes(codes_b, i))
        out -= s_a[:, i : i + 1] * (kmat - k_af)
        out -= (kmat - k_fa) * s_b[:, i][None, :]
        out += kmat - k_af - k_fa + k_ff
    return out


def stein_kernel(x: int, y: int, score, spec: KernelSpec, n: int) -> float:
    ev = KernelEvaluator(spec, n)
    return float(stein_kernel_matrix(np.array([x]), np.array([y]), score, ev)[0, 0])


def _restrict_defined(support, score, on_undefined: str):
    mask = score.defined_mask(support.codes)
    if np.all(mask):
        return support
    if on_undefined == "error":
        bad = support.codes[~mask][0]
        raise ScoreUndefinedError(f"score undefined at sampled outcome {int(bad)}")
    if on_undefined != "drop":
        raise UsageError(f"unknown undefined-score policy {on_undefined!r}")
    kept = support.weights[mask]
    if kept.sum() <= 0.0:
        raise ScoreUndefinedError("score undefined at every sampled outcome")
    from .data import WeightedSupport

    return WeightedSupport(support.n, support.codes[mask], kept / kept.sum())


def stein_cost_weighted(
    support,
    score,
    spec: KernelSpec,
    on_undefined: str = "error",
    evaluator: KernelEvaluator | None = None,
) -> float:
    """Mean of k_pi over independent pairs of the weighted support."""
    ev = evaluator if evaluator is not None else KernelEvaluator(spec, support.n)
    support = _restrict_defined(to_weighted_support(support), score, on_undefined)
    smat = stein_kernel_matrix(support.codes, support.codes, score, ev)
    return float(support.weights @ smat @ support.weights)


def stein_cost(
    x: sim.SampleSet,
    score,
    spec: KernelSpec,
    on_undefined: str = "error",
    evaluator: KernelEvaluator | None = None,
) -> CostValue:
    """Sampled Stein cost: mean of k_pi over all ordered pairs of x."""
    if len(x) < 1:
        raise UsageError("stein cost needs at least one sample")
    value = stein_cost_weighted(x, score, spec, on_undefined, evaluator)
    return CostValue(value, len(x), getattr(score, "data_count", 0))


def stein_cost_exact(
    params_dist: sim.ProbabilityVector,
    score,
    spec: KernelSpec,
    evaluator: KernelEvaluator | None = None,
) -> float:
    """Exact-expectation Stein cost of an explicit model distribution."""
    return stein_cost_weighted(params_dist, score, spec, "error", evaluator)


def stein_gradient(
    params: model.CircuitParams,
    idx: model.ParamIndex,
    x: sim.SampleSet,
    score,
    spec: KernelSpec,
    seed,
    n_shift: int | None = None,
    on_undefined: str = "error",
    evaluator: KernelEvaluator | None = None,
) -> float:
    """Sampled d/d theta of E_{x,y ~ p}[k_pi], shifting each p slot in turn."""
    ev = evaluator if evaluator is not None else KernelEvaluator(spec, params.n)
    count = len(x) if n_shift is None else int(n_shift)
    up_pv, dn_pv = model.shift_pair_distributions(params, idx)
    seed_up, seed_dn = split_seeds(seed, 2)
    sup = _restrict_defined(to_weighted_support(sim.sample(up_pv, count, seed_up)), score, on_undefined)
    sdn = _restrict_defined(to_weighted_support(sim.sample(dn_pv, count, seed_dn)), score, on_undefined)
    sx = _restrict_defined(to_weighted_support(x), score, on_undefined)

    def pair_mean(a, b) -> float:
        return float(a.weights @ stein_kernel_matrix(a.codes, b.codes, score, ev) @ b.weights)

    return (
        pair_mean(sup, sx)
        - pair_mean(sdn, sx)
        + pair_mean(sx, sup)
        - pair_mean(sx, sdn)
    )


def stein_gradient_exact(
    params: model.CircuitParams,
    idx: model.ParamIndex,
    score,
    spec: KernelSpec,
    evaluator: KernelEvaluator | None = None,
) -> float:
    """Population gradient over the full outcome space."""
    ev = evaluator if evaluator is not None else KernelEvaluator(spec, params.n)
    codes = np.arange(1 << params.n, dtype=np.int64)
    smat = stein_kernel_matrix(codes, codes, score, ev)
    up_pv, dn_pv = model.shift_pair_distributions(params, idx)
    delta = up_pv.probs - dn_pv.probs
    p = model.build_distribution(params).probs
    return float(delta @ smat @ p + p @ smat @ delta)

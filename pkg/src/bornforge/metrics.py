"""Exact divergence diagnostics and the inequality harness relating them.

Total variation is the common yardstick of every experiment; KL is reported
for diagnosis only (it is never a training cost).  The harness checks the
chain sqrt(MMD) <= TV <= OT_0 <= n TV plus the entropic-gap window and
Pinsker, recording each side so a failed bound is inspectable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sim
from .cost_mmd import mmd_exact
from .cost_sinkhorn import exact_ot, gap_bound, regularized_ot
from .data import to_weighted_support
from .errors import ShapeError
from .kernels import KernelSpec

COMPARE_SLACK = 1e-8


@dataclass(frozen=True)
class BoundCheck:
    """One inequality lhs <= rhs; holds is None when not applicable."""

    name: str
    lhs: float
    rhs: float
    holds: bool | None


@dataclass(frozen=True)
class MetricReport:
    tv: float
    kl: float
    mmd: float
    ot_exact: float
    ot_eps: float | None
    checks: tuple[BoundCheck, ...]

    def all_hold(self) -> bool:
        return all(c.holds is not False for c in self.checks)


def _check_pair(p: sim.ProbabilityVector, q: sim.ProbabilityVector) -> None:
    if p.n != q.n:
        raise ShapeError("distributions live on different qubit counts")


def tv_distance(p: sim.ProbabilityVector, q: sim.ProbabilityVector) -> float:
    """Half the l1 distance; in [0, 1]."""
    _check_pair(p, q)
    return float(0.5 * np.sum(np.abs(p.probs - q.probs)))


def kl_divergence(p: sim.ProbabilityVector, q: sim.ProbabilityVector) -> float:
    """KL(p || q) with 0 log 0 = 0; +inf when q misses mass p carries."""
    _check_pair(p, q)
    mask = p.probs > 0.0
    if np.any(q.probs[mask] <= 0.0):
        return math.inf
    return float(np.sum(p.probs[mask] * np.log(p.probs[mask] / q.probs[mask])))


def bound_harness(
    p: sim.ProbabilityVector,
    q: sim.ProbabilityVector,
    spec: KernelSpec | None = None,
    eps: float | None = 0.1,
) -> MetricReport:
    """Evaluate the metric chain (and entropic window when eps is given)."""
    _check_pair(p, q)
    spec = spec if spec is not None else KernelSpec("gaussian")
    tv = tv_distance(p, q)
    kl = kl_divergence(p, q)
    mmd = mmd_exact(p, q, spec)
    ot0 = exact_ot(p, q)
    checks = [
        BoundCheck("sqrt_mmd_le_tv", math.sqrt(max(mmd, 0.0)), tv, math.sqrt(max(mmd, 0.0)) <= tv + COMPARE_SLACK),
        BoundCheck("tv_le_ot", tv, ot0, tv <= ot0 + COMPARE_SLACK),
        BoundCheck("ot_le_n_tv", ot0, p.n * tv, ot0 <= p.n * tv + COMPARE_SLACK),
    ]
    if math.isinf(kl):
        checks.append(BoundCheck("pinsker_tv_le_sqrt_half_kl", tv, math.inf, None))
    else:
        rhs = math.sqrt(kl / 2.0)
        checks.append(BoundCheck("pinsker_tv_le_sqrt_half_kl", tv, rhs, tv <= rhs + COMPARE_SLACK))
    ot_eps_val: float | None = None
    if eps is not None:
        ot_eps_val, _ = regularized_ot(to_weighted_support(p), to_weighted_support(q), eps)
        gap = ot_eps_val - ot0
        checks.append(BoundCheck("entropic_gap_nonnegative", 0.0, gap, 0.0 <= gap + COMPARE_SLACK))
        upper = gap_bound(eps, p.n)
        if upper is None:
            checks.append(BoundCheck("entropic_gap_upper", gap, math.nan, None))
        else:
            checks.append(BoundCheck("entropic_gap_upper", gap, upper, gap <= upper + COMPARE_SLACK))
    return MetricReport(tv, kl, mmd, ot0, ot_eps_val, tuple(checks))

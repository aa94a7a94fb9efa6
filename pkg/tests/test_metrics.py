import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bornforge import cost_mmd, cost_sinkhorn, kernels, metrics, sim

import oracles


def pv(n, values):
    return sim.ProbabilityVector(n, np.asarray(values, dtype=float))


def test_tv_hand_value():
    assert metrics.tv_distance(pv(1, [0.9, 0.1]), pv(1, [0.5, 0.5])) == pytest.approx(0.4)


def test_tv_metric_axioms_on_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = pv(2, oracles.random_simplex(rng, 4))
        q = pv(2, oracles.random_simplex(rng, 4))
        r = pv(2, oracles.random_simplex(rng, 4))
        tpq = metrics.tv_distance(p, q)
        assert 0.0 <= tpq <= 1.0
        assert tpq == pytest.approx(metrics.tv_distance(q, p))
        assert metrics.tv_distance(p, p) == 0.0
        assert tpq <= metrics.tv_distance(p, r) + metrics.tv_distance(r, q) + 1e-12


def test_kl_hand_value_and_zero_conventions():
    p = pv(1, [1.0, 0.0])
    q = pv(1, [0.5, 0.5])
    # 0 log 0 = 0, so only the first term contributes.
    assert metrics.kl_divergence(p, q) == pytest.approx(np.log(2.0))
    assert metrics.kl_divergence(q, q) == 0.0


def test_kl_support_violation_is_infinite():
    p = pv(1, [0.5, 0.5])
    q = pv(1, [1.0, 0.0])
    assert metrics.kl_divergence(p, q) == np.inf


def test_bound_chain_on_random_full_support_pairs():
    rng = np.random.default_rng(1)
    spec = kernels.KernelSpec(kind="gaussian")
    for n in (2, 3):
        codes = np.arange(1 << n)
        kmat = kernels.full_space_matrix(spec, n)
        cmat = cost_sinkhorn.cost_matrix(codes, codes)
        for _ in range(25):
            p = pv(n, oracles.random_simplex(rng, 1 << n, floor=0.01))
            q = pv(n, oracles.random_simplex(rng, 1 << n, floor=0.01))
            tv = metrics.tv_distance(p, q)
            mmd = cost_mmd.mmd_exact_from_matrix(p, q, kmat)
            ot = oracles.ot_reference(p.probs, q.probs, cmat)
            assert np.sqrt(max(mmd, 0.0)) <= tv + 1e-8
            assert tv <= ot + 1e-8
            assert ot <= n * tv + 1e-8


def test_harness_reports_all_checks_holding():
    rng = np.random.default_rng(2)
    p = pv(2, oracles.random_simplex(rng, 4, floor=0.02))
    q = pv(2, oracles.random_simplex(rng, 4, floor=0.02))
    report = metrics.bound_harness(p, q, eps=0.1)
    names = {c.name for c in report.checks}
    assert {
        "sqrt_mmd_le_tv",
        "tv_le_ot",
        "ot_le_n_tv",
        "pinsker_tv_le_sqrt_half_kl",
        "entropic_gap_nonnegative",
        "entropic_gap_upper",
    } <= names
    assert report.all_hold()
    assert report.tv == pytest.approx(metrics.tv_distance(p, q))


def test_harness_marks_pinsker_not_applicable_without_support():
    p = pv(1, [0.5, 0.5])
    q = pv(1, [1.0, 0.0])
    report = metrics.bound_harness(p, q, eps=None)
    pinsker = {c.name: c for c in report.checks}["pinsker_tv_le_sqrt_half_kl"]
    assert pinsker.holds is None
    assert report.kl == np.inf
    assert report.all_hold()  # not-applicable never counts as failure


def test_harness_marks_entropic_bound_not_applicable_at_huge_eps():
    rng = np.random.default_rng(3)
    p = pv(2, oracles.random_simplex(rng, 4, floor=0.02))
    q = pv(2, oracles.random_simplex(rng, 4, floor=0.02))
    report = metrics.bound_harness(p, q, eps=100.0)
    upper = {c.name: c for c in report.checks}["entropic_gap_upper"]
    assert upper.holds is None


def test_harness_skips_entropic_checks_without_eps():
    rng = np.random.default_rng(4)
    p = pv(2, oracles.random_simplex(rng, 4, floor=0.02))
    q = pv(2, oracles.random_simplex(rng, 4, floor=0.02))
    names = {c.name for c in metrics.bound_harness(p, q, eps=None).checks}
    assert "entropic_gap_nonnegative" not in names


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_pinsker_inequality_property(seed):
    rng = np.random.default_rng(seed)
    p = pv(2, oracles.random_simplex(rng, 4, floor=0.001))
    q = pv(2, oracles.random_simplex(rng, 4, floor=0.001))
    tv = metrics.tv_distance(p, q)
    kl = metrics.kl_divergence(p, q)
    assert tv <= np.sqrt(kl / 2.0) + 1e-9

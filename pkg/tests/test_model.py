import numpy as np
import pytest

from bornforge import model, sim
from bornforge.errors import UsageError

import oracles


def random_params(rng, n, family="methods", trainable=None):
    j = rng.uniform(-np.pi / 3, np.pi / 3, size=(n, n))
    j = np.triu(j, 1)
    j = j + j.T
    b = rng.uniform(-np.pi / 3, np.pi / 3, size=n)
    builder = {"methods": model.methods_ansatz, "iqp": model.iqp_params, "qaoa": model.qaoa_params}[family]
    return builder(n, j, b, trainable=trainable)


def test_param_count_and_canonical_order():
    n = 3
    assert model.num_params(n) == 3 + 4 * 3
    idxs = model.param_indices(n)
    assert len(idxs) == model.num_params(n)
    assert [i.kind for i in idxs[:3]] == ["coupling"] * 3
    assert idxs[0].qubits == (0, 1) and idxs[2].qubits == (1, 2)
    positions = [model.flat_position(n, i) for i in idxs]
    assert positions == list(range(model.num_params(n)))


def test_flatten_unflatten_round_trip():
    rng = np.random.default_rng(0)
    params = random_params(rng, 3)
    flat = model.flatten(params)
    back = model.unflatten(3, flat, params.trainable)
    assert np.allclose(model.flatten(back), flat)
    assert np.array_equal(back.trainable, params.trainable)
    for idx in model.param_indices(3):
        assert model.get_entry(back, idx) == pytest.approx(model.get_entry(params, idx))


def test_set_entry_keeps_coupling_symmetric():
    params = model.methods_ansatz(3)
    idx = model.ParamIndex("coupling", (0, 2))
    updated = model.set_entry(params, idx, 0.7)
    assert updated.j[0, 2] == updated.j[2, 0] == 0.7
    assert params.j[0, 2] == 0.0  # original untouched


def test_iqp_final_layer_is_hadamard_up_to_phase():
    gate = sim.final_layer_unitary((model.IQP_ANGLE, 0.0, model.IQP_ANGLE))
    assert np.max(np.abs(gate - 1j * oracles.HADAMARD)) < 1e-12


def test_iqp_distribution_matches_hand_built_oracle():
    # J_01 = b_0 = b_1 = pi/8; the global phase from i^n drops out of the probabilities.
    n = 2
    j = np.array([[0.0, np.pi / 8], [np.pi / 8, 0.0]])
    b = np.full(2, np.pi / 8)
    got = model.build_distribution(model.iqp_params(n, j, b)).probs
    h2 = oracles.dense_hadamard_layer(n)
    amps = h2 @ oracles.dense_ising(n, j, b) @ h2[:, 0]
    assert np.max(np.abs(got - np.abs(amps) ** 2)) < 1e-12


def test_iqp_zero_params_gives_all_zeros_point_mass():
    # With J = b = 0 the Hadamard pair cancels, leaving the all-zeros outcome.
    for n in (2, 3):
        probs = model.build_distribution(model.iqp_params(n)).probs
        assert probs[0] == pytest.approx(1.0, abs=1e-12)


def test_qaoa_final_layer_is_minus_x_rotation():
    gate = sim.final_layer_unitary((-model.METHODS_FINAL_GAMMA, 0.0, 0.0))
    want = oracles.taylor_gate(-np.pi / 4, 0.0, 0.0)
    assert np.max(np.abs(gate - want)) < 1e-12
    params = model.qaoa_params(2)
    assert np.allclose(params.gamma, -np.pi / 4)
    assert np.allclose(params.delta, 0.0) and np.allclose(params.sigma, 0.0)


def test_methods_ansatz_defaults():
    params = model.methods_ansatz(3)
    assert np.allclose(params.gamma, np.pi / 4)
    assert np.allclose(params.delta, 0.0)
    assert np.allclose(params.sigma, 0.0)
    # Final-layer angles are frozen by default.
    for kind in ("gamma", "delta", "sigma"):
        for k in range(3):
            assert not params.trainable[model.flat_position(3, model.ParamIndex(kind, (k,)))]


def test_shift_rule_matches_finite_differences_every_kind():
    rng = np.random.default_rng(21)
    n = 2
    configs = [
        random_params(rng, n, trainable=np.ones(model.num_params(n), dtype=bool)),
    ]
    # Pure-Y and pure-Z final layers so delta and sigma shifts are exercised too.
    base = model.make_params(
        n, np.zeros((n, n)), rng.uniform(-1, 1, n),
        gamma=0.0, delta=0.3, sigma=0.0,
        trainable=np.ones(model.num_params(n), dtype=bool),
    )
    configs.append(base)
    configs.append(
        model.make_params(
            n, np.zeros((n, n)), rng.uniform(-1, 1, n),
            gamma=0.0, delta=0.0, sigma=-0.8,
            trainable=np.ones(model.num_params(n), dtype=bool),
        )
    )
    checked_kinds = set()
    for params in configs:
        for idx in model.param_indices(n):
            kind = idx.kind
            if kind == "gamma" and not (np.allclose(params.delta, 0) and np.allclose(params.sigma, 0)):
                continue
            if kind == "delta" and not (np.allclose(params.gamma, 0) and np.allclose(params.sigma, 0)):
                continue
            if kind == "sigma" and not (np.allclose(params.gamma, 0) and np.allclose(params.delta, 0)):
                continue
            grad = model.prob_gradient(params, idx)
            theta = model.get_entry(params, idx)

            def probs_at(t, params=params, idx=idx):
                return model.build_distribution(model.set_entry(params, idx, t)).probs

            fd = oracles.fd_derivative(probs_at, theta)
            assert np.max(np.abs(grad - fd)) < 1e-6
            checked_kinds.add(kind)
    assert checked_kinds == {"coupling", "local", "gamma", "delta", "sigma"}


def test_shift_rule_hand_case_single_qubit_local_field():
    # n=1 methods circuit: p(0) = (1 + sin 2b)/2, so dp(0)/db = cos 2b.
    params = model.methods_ansatz(1)
    grad = model.prob_gradient(params, model.ParamIndex("local", (0,)))
    assert grad[0] == pytest.approx(1.0, abs=1e-12)
    assert grad[1] == pytest.approx(-1.0, abs=1e-12)
    shifted = model.set_entry(params, model.ParamIndex("local", (0,)), 0.4)
    grad = model.prob_gradient(shifted, model.ParamIndex("local", (0,)))
    assert grad[0] == pytest.approx(np.cos(0.8), abs=1e-12)


def test_shift_pair_distributions_offsets():
    params = model.methods_ansatz(2)
    idx = model.ParamIndex("local", (1,))
    up, dn = model.shift_pair_distributions(params, idx)
    up_direct = model.build_distribution(model.set_entry(params, idx, model.PARAM_SHIFT))
    dn_direct = model.build_distribution(model.set_entry(params, idx, -model.PARAM_SHIFT))
    assert np.allclose(up.probs, up_direct.probs)
    assert np.allclose(dn.probs, dn_direct.probs)


def test_final_layer_shift_guard_with_mixed_siblings():
    # A gamma shift is only exact when delta = sigma = 0 on that qubit.
    n = 1
    params = model.make_params(
        n, np.zeros((1, 1)), np.zeros(1), gamma=0.5, delta=0.2, sigma=0.0,
        trainable=np.ones(model.num_params(n), dtype=bool),
    )
    with pytest.raises(UsageError):
        model.prob_gradient(params, model.ParamIndex("gamma", (0,)))


def test_gradient_requires_trainable_parameter():
    params = model.methods_ansatz(2)  # final layer frozen
    with pytest.raises(UsageError):
        model.prob_gradient(params, model.ParamIndex("gamma", (0,)))


def test_hard_angle_families():
    grid = model.random_hard_angles(200, "grid8", seed=1)
    lattice = np.arange(8) * np.pi / 8.0
    assert np.all(np.min(np.abs(grid[:, None] - lattice[None, :]), axis=1) < 1e-12)

    odd = model.random_hard_angles(200, "odd_multiple", seed=2, d=3)
    ratio = odd * 8.0 * 3.0 / np.pi
    assert np.allclose(ratio, np.round(ratio))
    assert np.all(np.round(ratio) % 2 == 1)
    assert model.on_odd_lattice(odd, 3)

    irr = model.random_hard_angles(200, "irrational", seed=3)
    assert np.all((irr >= 0.0) & (irr < 2.0 * np.pi))

    with pytest.raises(UsageError):
        model.random_hard_angles(5, "odd_multiple", seed=0)  # missing denominator


def test_snap_to_odd_lattice():
    vals = np.array([0.0, np.pi / 8, np.pi / 2, -0.3])
    snapped = model.snap_to_odd_lattice(vals, 1)
    assert model.on_odd_lattice(snapped, 1)
    step = np.pi / 8.0
    assert np.all(np.abs(snapped - vals) <= step + 1e-12)


def test_params_json_round_trip():
    rng = np.random.default_rng(17)
    params = random_params(rng, 3)
    back = model.json_to_params(model.params_to_json(params))
    assert back.n == params.n
    assert np.allclose(back.j, params.j)
    assert np.allclose(back.b, params.b)
    assert np.allclose(back.gamma, params.gamma)
    assert np.array_equal(back.trainable, params.trainable)

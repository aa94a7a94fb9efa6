import dataclasses
import json

import numpy as np
import pytest

from bornforge import model, sim
from bornforge.config import (
    CostConfig,
    DataConfig,
    LoopConfig,
    ModelConfig,
    OptimizerConfig,
    RunConfig,
    ScoreConfig,
)
from bornforge.data import target_pmf, TargetSpec, sample_target
from bornforge.errors import ConfigError
from bornforge.train import adam_init, adam_step, run_training, trace_csv


def small_cfg(**over):
    base = dict(
        n=2,
        seed=5,
        cost=CostConfig(kind="mmd"),
        data=DataConfig(samples=60, train_samples=48),
        loop=LoopConfig(epochs=3, model_samples=40, batch=20, expectations="sampled"),
        optimizer=OptimizerConfig(lr=0.05),
    )
    base.update(over)
    return RunConfig(**base)


def reference_adam(grads, lr, b1=0.9, b2=0.999, eps=1e-8):
    m = np.zeros_like(grads[0])
    v = np.zeros_like(grads[0])
    steps = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1**t)
        vh = v / (1 - b2**t)
        steps.append(lr * mh / (np.sqrt(vh) + eps))
    return steps


def test_adam_matches_reference_sequence():
    rng = np.random.default_rng(0)
    grads = [rng.normal(size=4) for _ in range(20)]
    state = adam_init(4, lr=0.02)
    got = []
    for g in grads:
        state, step = adam_step(state, g)
        got.append(step)
    want = reference_adam(grads, lr=0.02)
    assert np.max(np.abs(np.array(got) - np.array(want))) < 1e-12


def test_adam_constant_gradient_reaches_unit_step():
    state = adam_init(1, lr=0.07)
    g = np.array([3.7])
    for _ in range(200):
        state, step = adam_step(state, g)
    assert abs(step[0] - 0.07) < 1e-6


def test_record_row_semantics():
    cfg = small_cfg()
    record = run_training(cfg)
    assert len(record.rows) == cfg.loop.epochs + 1
    assert [r.epoch for r in record.rows] == list(range(cfg.loop.epochs + 1))
    assert record.rows[0].params_hash != record.rows[-1].params_hash
    assert len(record.rows[0].params_hash) == 64
    # Row 0 is the evaluation of the untouched initialization.
    assert record.rows[0].params_flat == tuple(model.flatten(record.initial_params).tolist())


def test_zero_epochs_only_initial_evaluation():
    record = run_training(small_cfg(loop=LoopConfig(epochs=0, model_samples=40, batch=20, expectations="exact")))
    assert len(record.rows) == 1
    assert record.rows[0].epoch == 0


def test_exact_mode_train_equals_test_cost():
    record = run_training(small_cfg(loop=LoopConfig(epochs=2, model_samples=40, batch=20, expectations="exact")))
    for row in record.rows:
        assert row.cost_train == row.cost_test


def test_repeat_run_is_byte_identical():
    cfg = small_cfg()
    a = trace_csv(run_training(cfg))
    b = trace_csv(run_training(cfg))
    assert a == b
    other = trace_csv(run_training(dataclasses.replace(cfg, seed=6)))
    assert other != a


def test_thread_count_does_not_change_results():
    cfg = small_cfg(cost=CostConfig(kind="sinkhorn"))
    a = trace_csv(run_training(cfg))
    b = trace_csv(run_training(dataclasses.replace(cfg, threads=4)))
    assert a == b


def test_exact_mmd_cost_decreases_over_windows():
    # With exact expectations and a modest step, every 10-epoch window improves.
    cfg = small_cfg(
        loop=LoopConfig(epochs=40, model_samples=40, batch=20, expectations="exact"),
        optimizer=OptimizerConfig(lr=0.01),
    )
    record = run_training(cfg)
    costs = [r.cost_train for r in record.rows]
    for t in range(len(costs) - 10):
        assert costs[t + 10] < costs[t] + 1e-12
    assert costs[-1] < costs[0]


def test_single_mode_sinkhorn_run_reduces_tv():
    cfg = RunConfig(
        n=2,
        seed=1,
        cost=CostConfig(kind="sinkhorn", epsilon=0.1),
        data=DataConfig(samples=500, train_samples=400, num_modes=1),
        loop=LoopConfig(epochs=50, model_samples=500, batch=250, expectations="sampled"),
        optimizer=OptimizerConfig(lr=0.05),
    )
    record = run_training(cfg)
    assert record.rows[-1].tv < record.rows[0].tv


def test_stein_exact_score_training_runs():
    cfg = small_cfg(
        cost=CostConfig(kind="stein", score=ScoreConfig(method="exact")),
        loop=LoopConfig(epochs=2, model_samples=40, batch=20, expectations="sampled"),
    )
    record = run_training(cfg)
    assert np.isfinite([r.cost_train for r in record.rows]).all()


def test_spectral_score_training_runs():
    cfg = small_cfg(
        cost=CostConfig(kind="stein", score=ScoreConfig(method="spectral")),
        loop=LoopConfig(epochs=2, model_samples=40, batch=20, expectations="sampled"),
    )
    record = run_training(cfg)
    assert np.isfinite([r.cost_train for r in record.rows]).all()


def test_lattice_snapping_keeps_parameters_on_lattice():
    cfg = small_cfg(
        model=ModelConfig(family="methods", init="odd_multiple", lattice_d=2, snap_to_lattice=True),
        loop=LoopConfig(epochs=3, model_samples=40, batch=20, expectations="exact"),
    )
    record = run_training(cfg)
    n = cfg.n
    trainable_pos = [model.flat_position(n, i) for i in model.param_indices(n) if record.final_params.trainable[model.flat_position(n, i)]]
    for row in record.rows:
        values = np.array(row.params_flat)[trainable_pos]
        assert model.on_odd_lattice(values, 2)


def test_injected_dataset_and_target(tmp_path):
    tspec = TargetSpec(2, (1,), 0.9)
    dataset = sample_target(tspec, 60, seed=11)
    cfg = small_cfg(loop=LoopConfig(epochs=1, model_samples=40, batch=20, expectations="exact"))
    record = run_training(cfg, dataset=dataset, target_dist=target_pmf(tspec))
    assert np.isfinite(record.rows[0].tv)
    assert record.target is None


def test_record_serializes_to_json():
    record = run_training(small_cfg(loop=LoopConfig(epochs=1, model_samples=40, batch=20, expectations="sampled")))
    doc = json.loads(record.to_json())
    assert doc["backend"] in ("compiled", "pure")
    assert doc["config"]["n"] == 2
    assert len(doc["rows"]) == 2
    assert doc["rows"][0]["params_sha256"] == record.rows[0].params_hash
    assert doc["target_modes"] is not None


def test_trace_csv_shape():
    record = run_training(small_cfg(loop=LoopConfig(epochs=2, model_samples=40, batch=20, expectations="sampled")))
    lines = trace_csv(record).strip().splitlines()
    assert lines[0] == "epoch,cost_train,cost_test,tv"
    assert len(lines) == 4
    parsed = [float(tok) for tok in lines[1].split(",")]
    assert parsed[0] == 0.0


def test_stein_exact_score_needs_known_target(tmp_path):
    path = tmp_path / "plain.txt"
    path.write_text("01\n10\n00\n11\n" * 10)
    cfg = small_cfg(
        cost=CostConfig(kind="stein", score=ScoreConfig(method="exact")),
        data=DataConfig(source="file", file=str(path), samples=40, train_samples=30),
        loop=LoopConfig(epochs=1, model_samples=40, batch=20, expectations="sampled"),
    )
    with pytest.raises(ConfigError):
        run_training(cfg)

"""Adam training loop over the circuit parameters, with a reproducible record.

Every random stream is derived from the run seed by a fixed integer path
(data, split, init, per-epoch model samples, per-(epoch, parameter) gradient
draws, per-epoch minibatch picks), so a record is byte-identical across runs
of the same configuration and independent of the thread count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__, model, sim
from ._core import BACKEND
from ._rng import as_generator, spawn_seed
from .config import RunConfig, config_to_dict, validate_config
from .cost_mmd import mmd_estimate, mmd_exact, mmd_gradient, mmd_gradient_exact
from .cost_sinkhorn import (
    divergence_state,
    divergence_from_state,
    sinkhorn_divergence,
    sinkhorn_gradient,
    sinkhorn_gradient_exact,
)
from .cost_stein import (
    ExactScore,
    default_eigenvector_count,
    spectral_score,
    stein_cost,
    stein_cost_exact,
    stein_gradient,
    stein_gradient_exact,
)
from .data import (
    TargetSpec,
    empirical_pmf,
    load_dataset,
    random_target,
    sample_target,
    split_train_test,
    target_pmf,
)
from .errors import ConfigError
from .kernels import KernelEvaluator
from .metrics import tv_distance

STREAM_DATA, STREAM_SPLIT, STREAM_INIT, STREAM_EPOCH, STREAM_GRAD, STREAM_BATCH, STREAM_EVAL = range(7)


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators over the trainable parameter vector."""

    m: np.ndarray
    v: np.ndarray
    t: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(dim: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    return AdamState(np.zeros(dim), np.zeros(dim), 0, lr, beta1, beta2, eps)


def adam_step(state: AdamState, grad: np.ndarray) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected update; returns the new state and the step to subtract."""
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    step = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, t=t), step


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    cost_train: float
    cost_test: float
    tv: float
    params_flat: tuple[float, ...]
    params_hash: str


@dataclass
class TrainingRecord:
    config: RunConfig
    backend: str
    version: str
    rows: list[EpochRow]
    initial_params: model.CircuitParams
    final_params: model.CircuitParams
    target: TargetSpec | None
    dataset: sim.SampleSet
    dataset_seed: int

    def to_dict(self) -> dict:
        return {
            "config": config_to_dict(self.config),
            "backend": self.backend,
            "version": self.version,
            "target_modes": [sim.code_to_string(m, self.config.n) for m in self.target.modes]
            if self.target
            else None,
            "rows": [
                {
                    "epoch": r.epoch,
                    "cost_train": r.cost_train,
                    "cost_test": r.cost_test,
                    "tv": r.tv,
                    "params": list(r.params_flat),
                    "params_sha256": r.params_hash,
                }
                for r in self.rows
            ],
            "initial_params": model.params_to_dict(self.initial_params),
            "final_params": model.params_to_dict(self.final_params),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def trace_csv(record: TrainingRecord) -> str:
    """epoch,cost_train,cost_test,tv rows; floats via repr for byte stability."""
    lines = ["epoch,cost_train,cost_test,tv"]
    for r in record.rows:
        lines.append(f"{r.epoch},{r.cost_train!r},{r.cost_test!r},{r.tv!r}")
    return "\n".join(lines) + "\n"


def _params_hash(params: model.CircuitParams) -> str:
    return hashlib.sha256(model.flatten(params).tobytes()).hexdigest()


def _init_params(cfg: RunConfig) -> model.CircuitParams:
    n = cfg.n
    mc = cfg.model
    seed = spawn_seed(cfg.seed, STREAM_INIT)
    ncouple = n * (n - 1) // 2
    if mc.init == "uniform":
        rng = as_generator(seed)
        angles = rng.uniform(-mc.init_scale, mc.init_scale, size=ncouple + n)
    else:
        angles = model.random_hard_angles(ncouple + n, mc.init, seed, mc.lattice_d)
    jmat = np.zeros((n, n))
    jmat[np.triu_indices(n, k=1)] = angles[:ncouple]
    jmat = jmat + jmat.T
    b = angles[ncouple:]
    mask = model.default_trainable(n)
    if mc.train_final_layer:
        for k in range(n):
            mask[model.flat_position(n, model.ParamIndex("gamma", (k,)))] = True
    if mc.family == "iqp":
        return model.iqp_params(n, jmat, b, trainable=mask)
    if mc.family == "qaoa":
        return model.qaoa_params(n, jmat, b, trainable=mask)
    return model.methods_ansatz(n, jmat, b, trainable=mask)


def _subsample(samples: sim.SampleSet, count: int, seed) -> sim.SampleSet:
    if count >= len(samples):
        return samples
    picks = as_generator(seed).choice(len(samples), size=count, replace=False)
    return sim.SampleSet(samples.n, samples.codes[picks])


class _CostDriver:
    """Binds one cost kind to the run's data, score and kernel cache."""

    def __init__(self, cfg: RunConfig, target_pv, train_data, test_data):
        self.cfg = cfg
        self.kind = cfg.cost.kind
        self.eps = cfg.cost.epsilon
        self.evaluator = KernelEvaluator(cfg.cost.kernel, cfg.n)
        self.target_pv = target_pv
        self.train_data = train_data
        self.test_data = test_data
        self.exact_mode = cfg.loop.expectations == "exact"
        # Exact-mode data side: the target pmf when known, else the empirical pmf.
        self.data_pv = target_pv if target_pv is not None else empirical_pmf(train_data)
        self.score = None
        if self.kind == "stein":
            method = cfg.cost.score.method
            if method == "exact":
                if target_pv is None:
                    raise ConfigError(
                        "cost.score.method=exact needs an explicit target distribution "
                        "(synthetic data or a dataset file with a target header)"
                    )
                self.score = ExactScore(target_pv)
            else:
                j = cfg.cost.score.eigenvectors
                if j is None:
                    # The Gram matrix has one positive eigenvalue per distinct
                    # sample code, so the default cannot exceed that count.
                    distinct = len(np.unique(train_data.codes))
                    j = min(default_eigenvector_count(cfg.n), distinct)
                self.score = spectral_score(train_data, cfg.cost.kernel, cfg.n, j, self.evaluator)

    def cost(self, params: model.CircuitParams, model_samples, data_split: str) -> float:
        if self.exact_mode:
            p = model.build_distribution(params)
            if self.kind == "mmd":
                return mmd_exact(p, self.data_pv, self.cfg.cost.kernel, self.evaluator)
            if self.kind == "stein":
                return stein_cost_exact(p, self.score, self.cfg.cost.kernel, self.evaluator)
            return sinkhorn_divergence(p, self.data_pv, self.eps).value
        data = self.train_data if data_split == "train" else self.test_data
        if self.kind == "mmd":
            return mmd_estimate(model_samples, data, self.cfg.cost.kernel, self.evaluator).value
        if self.kind == "stein":
            return stein_cost(model_samples, self.score, self.cfg.cost.kernel, evaluator=self.evaluator).value
        return sinkhorn_divergence(model_samples, data, self.eps).value

    def gradient(self, params: model.CircuitParams, indices, model_batch, data_batch, update: int) -> np.ndarray:
        cfg = self.cfg
        b = len(model_batch) if model_batch is not None else 0
        state = None
        if self.kind == "sinkhorn":
            if self.exact_mode:
                state = divergence_state(model.build_distribution(params), self.data_pv, self.eps)
            else:
                state = divergence_state(model_batch, data_batch, self.eps)

        def one(pos_idx):
            pos, idx = pos_idx
            seed = spawn_seed(cfg.seed, STREAM_GRAD, update, pos)
            if self.exact_mode:
                if self.kind == "mmd":
                    return mmd_gradient_exact(params, idx, self.data_pv, cfg.cost.kernel, self.evaluator)
                if self.kind == "stein":
                    return stein_gradient_exact(params, idx, self.score, cfg.cost.kernel, self.evaluator)
                return sinkhorn_gradient_exact(params, idx, self.data_pv, self.eps, state=state)
            if self.kind == "mmd":
                return mmd_gradient(params, idx, model_batch, data_batch, cfg.cost.kernel, seed, b, self.evaluator)
            if self.kind == "stein":
                return stein_gradient(params, idx, model_batch, self.score, cfg.cost.kernel, seed, b, evaluator=self.evaluator)
            return sinkhorn_gradient(params, idx, model_batch, data_batch, self.eps, seed, b, state=state)

        jobs = list(enumerate(indices))
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                return np.array(list(pool.map(one, jobs)))
        return np.array([one(j) for j in jobs])


def _load_data(cfg: RunConfig):
    if cfg.data.source == "file":
        samples, tspec = load_dataset(cfg.data.file)
        if samples.n != cfg.n:
            raise ConfigError(f"dataset file holds {samples.n}-bit strings but n={cfg.n}")
        n_train = min(cfg.data.train_samples, len(samples) - 1)
        return samples, tspec, n_train
    if cfg.data.modes is not None:
        tspec = TargetSpec(cfg.n, tuple(sim.string_to_code(m) for m in cfg.data.modes), cfg.data.retention)
    else:
        tspec = random_target(cfg.n, spawn_seed(cfg.seed, STREAM_DATA, 0), cfg.data.num_modes, cfg.data.retention)
    samples = sample_target(tspec, cfg.data.samples, spawn_seed(cfg.seed, STREAM_DATA, 1))
    return samples, tspec, cfg.data.train_samples


def run_training(
    cfg: RunConfig,
    dataset: sim.SampleSet | None = None,
    target_dist: sim.ProbabilityVector | None = None,
    init_params: model.CircuitParams | None = None,
) -> TrainingRecord:
    """Train per the configuration and return the full record.

    `dataset`, `target_dist` and `init_params` override the configured data
    source, the distribution used for progress metrics, and the seeded
    initialization; callers that train against another circuit's output pass
    all three.
    """
    validate_config(cfg)
    if dataset is not None:
        samples, tspec, n_train = dataset, None, cfg.data.train_samples
        if samples.n != cfg.n:
            raise ConfigError(f"injected dataset holds {samples.n}-bit strings but n={cfg.n}")
    else:
        samples, tspec, n_train = _load_data(cfg)
    train_data, test_data = split_train_test(samples, n_train, spawn_seed(cfg.seed, STREAM_SPLIT))
    target_pv = target_dist if target_dist is not None else (target_pmf(tspec) if tspec is not None else None)

    params = init_params if init_params is not None else _init_params(cfg)
    driver = _CostDriver(cfg, target_pv, train_data, test_data)
    indices = [idx for idx in model.param_indices(cfg.n) if params.trainable[model.flat_position(cfg.n, idx)]]
    positions = [model.flat_position(cfg.n, idx) for idx in indices]
    adam = adam_init(len(indices), cfg.optimizer.lr, cfg.optimizer.beta1, cfg.optimizer.beta2, cfg.optimizer.eps)

    def evaluate(params: model.CircuitParams, epoch: int) -> EpochRow:
        if cfg.loop.expectations == "exact":
            cost_train = driver.cost(params, None, "train")
            cost_test = cost_train
        else:
            pv = model.build_distribution(params)
            m_train = sim.sample(pv, cfg.loop.model_samples, spawn_seed(cfg.seed, STREAM_EVAL, epoch, 0))
            m_test = sim.sample(pv, cfg.loop.model_samples, spawn_seed(cfg.seed, STREAM_EVAL, epoch, 1))
            cost_train = driver.cost(params, m_train, "train")
            cost_test = driver.cost(params, m_test, "test")
        tv = tv_distance(model.build_distribution(params), target_pv) if target_pv is not None else float("nan")
        flat = model.flatten(params)
        return EpochRow(epoch, float(cost_train), float(cost_test), float(tv), tuple(flat.tolist()), _params_hash(params))

    rows = [evaluate(params, 0)]
    initial = params
    for update in range(cfg.loop.epochs):
        if cfg.loop.expectations == "sampled":
            pv = model.build_distribution(params)
            epoch_samples = sim.sample(pv, cfg.loop.model_samples, spawn_seed(cfg.seed, STREAM_EPOCH, update))
            model_batch = _subsample(epoch_samples, cfg.loop.batch, spawn_seed(cfg.seed, STREAM_BATCH, update, 0))
            data_batch = _subsample(train_data, cfg.loop.batch, spawn_seed(cfg.seed, STREAM_BATCH, update, 1))
        else:
            model_batch = data_batch = None
        grad = driver.gradient(params, indices, model_batch, data_batch, update)
        adam, step = adam_step(adam, grad)
        flat = model.flatten(params)
        flat[positions] -= step
        if cfg.model.snap_to_lattice:
            flat[positions] = model.snap_to_odd_lattice(flat[positions], cfg.model.lattice_d)
            if not model.on_odd_lattice(flat[positions], cfg.model.lattice_d):
                raise ConfigError("snapped parameters left the odd-multiple lattice")
        params = model.unflatten(cfg.n, flat, params.trainable)
        rows.append(evaluate(params, update + 1))

    return TrainingRecord(
        config=cfg,
        backend=BACKEND,
        version=__version__,
        rows=rows,
        initial_params=initial,
        final_params=params,
        target=tspec,
        dataset=samples,
        dataset_seed=cfg.seed,
    )

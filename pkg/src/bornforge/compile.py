"""Weak compilation: fit a mixer-constrained ansatz to another circuit's output.

The target is a fixed diagonal-Ising circuit with the Hadamard-like final
layer; the ansatz shares the Ising block but freezes its final layer to the
X-mixer at gamma = pi/4. Training matches output distributions, not
unitaries, so low total variation does not require matching parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import model, sim
from ._rng import as_generator, spawn_seed
from .config import CostConfig, DataConfig, LoopConfig, OptimizerConfig, RunConfig
from .errors import ConfigError
from .metrics import tv_distance
from .data import sample_target  # noqa: F401  (re-exported neighbours use the same sampling style)
from .train import STREAM_DATA, STREAM_INIT, TrainingRecord, run_training

STREAM_TARGET = 7
DEFAULT_TARGET_SCALE = np.pi / 2.0


def _default_config(n: int, seed: int) -> RunConfig:
    return RunConfig(
        n=n,
        seed=seed,
        cost=CostConfig(kind="sinkhorn", epsilon=0.1),
        data=DataConfig(samples=500, train_samples=400),
        optimizer=OptimizerConfig(lr=0.05),
        loop=LoopConfig(epochs=100, model_samples=500, batch=250, expectations="sampled"),
    )


@dataclass(frozen=True)
class CompileJob:
    """A target circuit, the ansatz starting point, and the run settings."""

    n: int
    target: model.CircuitParams
    ansatz_init: model.CircuitParams
    config: RunConfig

    def __post_init__(self) -> None:
        if self.target.n != self.n or self.ansatz_init.n != self.n:
            raise ConfigError("target and ansatz must act on the job's qubit count")
        if self.config.n != self.n:
            raise ConfigError("run config qubit count must match the job")
        _check_target(self.target)
        _check_ansatz(self.ansatz_init)


def _check_target(params: model.CircuitParams) -> None:
    ok = (
        np.allclose(params.gamma, model.IQP_ANGLE, atol=1e-12)
        and np.allclose(params.delta, 0.0, atol=1e-12)
        and np.allclose(params.sigma, model.IQP_ANGLE, atol=1e-12)
    )
    if not ok:
        raise ConfigError("compile target must use the fixed Hadamard-like final layer")


def _check_ansatz(params: model.CircuitParams) -> None:
    if not (np.allclose(params.delta, 0.0, atol=1e-12) and np.allclose(params.sigma, 0.0, atol=1e-12)):
        raise ConfigError("compile ansatz must keep delta = sigma = 0")
    n = params.n
    for kind in ("gamma", "delta", "sigma"):
        for k in range(n):
            if params.trainable[model.flat_position(n, model.ParamIndex(kind, (k,)))]:
                raise ConfigError("compile ansatz final layer must stay frozen")


def random_compile_job(
    n: int,
    seed: int,
    config: RunConfig | None = None,
    target_scale: float = DEFAULT_TARGET_SCALE,
    mixer_gamma: float = model.METHODS_FINAL_GAMMA,
) -> CompileJob:
    """Random target angles, seeded ansatz start, standard run settings."""
    cfg = config if config is not None else _default_config(n, seed)
    cfg = replace(cfg, n=n, seed=seed)
    ncouple = n * (n - 1) // 2

    def draw(stream: int, scale: float) -> tuple[np.ndarray, np.ndarray]:
        rng = as_generator(spawn_seed(seed, stream))
        angles = rng.uniform(-scale, scale, size=ncouple + n)
        jmat = np.zeros((n, n))
        jmat[np.triu_indices(n, k=1)] = angles[:ncouple]
        return jmat + jmat.T, angles[ncouple:]

    tj, tb = draw(STREAM_TARGET, target_scale)
    aj, ab = draw(STREAM_INIT, cfg.model.init_scale)
    target = model.iqp_params(n, tj, tb)
    ansatz = model.qaoa_params(n, aj, ab, mixer_gamma=mixer_gamma, trainable=model.default_trainable(n))
    return CompileJob(n=n, target=target, ansatz_init=ansatz, config=cfg)


@dataclass
class CompileReport:
    job: CompileJob
    record: TrainingRecord
    target_dist: sim.ProbabilityVector
    learned: model.CircuitParams = field(init=False)
    tv_initial: float = field(init=False)
    tv_final: float = field(init=False)

    def __post_init__(self) -> None:
        self.learned = self.record.final_params
        self.tv_initial = self.record.rows[0].tv
        self.tv_final = self.record.rows[-1].tv

    def parameter_table(self) -> str:
        n = self.job.n
        lines = [f"{'parameter':<16}{'target':>12}{'initial':>12}{'learned':>12}"]
        for idx in model.param_indices(n):
            name = f"{idx.kind}{idx.qubits}".replace(",)", ")")
            row = (
                model.get_entry(self.job.target, idx),
                model.get_entry(self.job.ansatz_init, idx),
                model.get_entry(self.learned, idx),
            )
            lines.append(f"{name:<16}" + "".join(f"{v:>12.6f}" for v in row))
        return "\n".join(lines)

    def probability_table(self) -> str:
        n = self.job.n
        learned_pv = model.build_distribution(self.learned)
        lines = [f"{'bitstring':<12}{'target':>12}{'learned':>12}"]
        for code in range(1 << n):
            lines.append(
                f"{sim.code_to_string(code, n):<12}"
                f"{self.target_dist.probs[code]:>12.6f}{learned_pv.probs[code]:>12.6f}"
            )
        return "\n".join(lines)

    def report_text(self) -> str:
        head = (
            f"weak compilation, n={self.job.n}, seed={self.job.config.seed}\n"
            f"cost={self.job.config.cost.kind}"
            f"(epsilon={self.job.config.cost.epsilon}), epochs={self.job.config.loop.epochs}\n"
            f"tv initial = {self.tv_initial:.6f}\n"
            f"tv final   = {self.tv_final:.6f}\n"
        )
        return head + "\n" + self.parameter_table() + "\n\n" + self.probability_table() + "\n"


def compile_run(job: CompileJob) -> CompileReport:
    """Sample the target circuit, train the ansatz on those samples, report."""
    cfg = job.config
    target_pv = model.build_distribution(job.target)
    data = sim.sample(target_pv, cfg.data.samples, spawn_seed(cfg.seed, STREAM_DATA, 1))
    record = run_training(cfg, dataset=data, target_dist=target_pv, init_params=job.ansatz_init)
    _check_ansatz(record.final_params)
    return CompileReport(job=job, record=record, target_dist=target_pv)

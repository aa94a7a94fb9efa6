"""Run configuration: nested dataclasses, JSON round-trip, validation.

load_config materializes every default, so a loaded configuration is a
complete record of what a run will do; save(load(x)) is the identity on the
materialized form.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from . import sim
from .cost_sinkhorn import DEFAULT_EPSILON
from .cost_stein import DEFAULT_RIDGE
from .data import DEFAULT_RETENTION
from .errors import ConfigError, UsageError
from .kernels import DEFAULT_SHOTS, KernelSpec, dict_to_spec, spec_to_dict

COST_KINDS = ("mmd", "stein", "sinkhorn")
SCORE_METHODS = ("exact", "identity", "spectral")
MODEL_FAMILIES = ("methods", "qaoa", "iqp")
INIT_FAMILIES = ("uniform", "grid8", "odd_multiple", "irrational")
EXPECTATION_MODES = ("sampled", "exact")


@dataclass(frozen=True)
class ScoreConfig:
    method: str = "exact"
    ridge: float = DEFAULT_RIDGE
    eigenvectors: int | None = None


@dataclass(frozen=True)
class CostConfig:
    kind: str = "mmd"
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec("gaussian"))
    score: ScoreConfig = field(default_factory=ScoreConfig)
    epsilon: float = DEFAULT_EPSILON


@dataclass(frozen=True)
class DataConfig:
    source: str = "synthetic"
    file: str | None = None
    modes: tuple[str, ...] | None = None
    num_modes: int | None = None
    retention: float = DEFAULT_RETENTION
    samples: int = 500
    train_samples: int = 400


@dataclass(frozen=True)
class ModelConfig:
    family: str = "methods"
    init: str = "uniform"
    init_scale: float = 0.39269908169872414  # pi/8
    lattice_d: int | None = None
    train_final_layer: bool = False
    snap_to_lattice: bool = False


@dataclass(frozen=True)
class OptimizerConfig:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(frozen=True)
class LoopConfig:
    epochs: int = 100
    model_samples: int = 500
    batch: int = 250
    expectations: str = "sampled"


@dataclass(frozen=True)
class RunConfig:
    n: int = 3
    seed: int = 0
    threads: int = 1
    out: str | None = None
    model: ModelConfig = field(default_factory=ModelConfig)
    cost: CostConfig = field(default_factory=CostConfig)
    data: DataConfig = field(default_factory=DataConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    loop: LoopConfig = field(default_factory=LoopConfig)


def validate_config(cfg: RunConfig) -> RunConfig:
    """Static consistency checks; raises ConfigError naming the field."""
    if not 1 <= cfg.n <= sim.MAX_QUBITS:
        raise ConfigError(f"n={cfg.n} outside [1, {sim.MAX_QUBITS}]")
    if cfg.threads < 1:
        raise ConfigError(f"threads={cfg.threads} must be at least 1")
    if cfg.cost.kind not in COST_KINDS:
        raise ConfigError(f"cost.kind={cfg.cost.kind!r} not one of {COST_KINDS}")
    if cfg.cost.score.method not in SCORE_METHODS:
        raise ConfigError(f"cost.score.method={cfg.cost.score.method!r} not one of {SCORE_METHODS}")
    if cfg.cost.kind == "stein" and cfg.cost.score.method == "identity":
        raise ConfigError(
            "cost.score.method: the identity score has no value at unseen model "
            "samples; use exact or spectral for training"
        )
    if cfg.cost.epsilon <= 0.0:
        raise ConfigError(f"cost.epsilon={cfg.cost.epsilon} must be positive")
    if cfg.model.family not in MODEL_FAMILIES:
        raise ConfigError(f"model.family={cfg.model.family!r} not one of {MODEL_FAMILIES}")
    if cfg.model.init not in INIT_FAMILIES:
        raise ConfigError(f"model.init={cfg.model.init!r} not one of {INIT_FAMILIES}")
    if cfg.model.init == "odd_multiple" and (cfg.model.lattice_d is None or cfg.model.lattice_d < 1):
        raise ConfigError("model.lattice_d: odd_multiple initialization needs a positive d")
    if cfg.model.snap_to_lattice and cfg.model.init != "odd_multiple":
        raise ConfigError("model.snap_to_lattice only applies to the odd_multiple family")
    if cfg.model.train_final_layer and cfg.model.family == "iqp":
        raise ConfigError(
            "model.train_final_layer: the iqp family has two nonzero final-layer "
            "angles per qubit, where the shift-rule gradient is not exact"
        )
    if cfg.data.source not in ("synthetic", "file"):
        raise ConfigError(f"data.source={cfg.data.source!r} not one of ('synthetic', 'file')")
    if cfg.data.source == "file" and not cfg.data.file:
        raise ConfigError("data.file: file source needs a path")
    if not 0.0 < cfg.data.retention <= 1.0:
        raise ConfigError(f"data.retention={cfg.data.retention} outside (0, 1]")
    if cfg.data.source == "synthetic" and not 0 < cfg.data.train_samples < cfg.data.samples:
        raise ConfigError("data.train_samples must split data.samples into two nonempty parts")
    if cfg.loop.epochs < 0:
        raise ConfigError(f"loop.epochs={cfg.loop.epochs} must be nonnegative")
    if cfg.loop.expectations not in EXPECTATION_MODES:
        raise ConfigError(f"loop.expectations={cfg.loop.expectations!r} not one of {EXPECTATION_MODES}")
    if cfg.loop.expectations == "sampled":
        if cfg.loop.model_samples < 2:
            raise ConfigError("loop.model_samples must be at least 2")
        if not 2 <= cfg.loop.batch <= cfg.loop.model_samples:
            raise ConfigError("loop.batch must lie in [2, loop.model_samples]")
    if cfg.optimizer.lr <= 0.0:
        raise ConfigError(f"optimizer.lr={cfg.optimizer.lr} must be positive")
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    doc = asdict(cfg)
    doc["cost"]["kernel"] = spec_to_dict(cfg.cost.kernel)
    doc["data"]["modes"] = list(cfg.data.modes) if cfg.data.modes is not None else None
    return doc


def _section(doc: dict, key: str) -> dict:
    sub = doc.get(key, {})
    if not isinstance(sub, dict):
        raise ConfigError(f"config section {key!r} must be an object")
    return sub


def config_from_dict(doc: dict) -> RunConfig:
    """Build a fully materialized RunConfig; unknown keys are rejected."""
    known = {"n", "seed", "threads", "out", "model", "cost", "data", "optimizer", "loop"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")

    def build(cls, section: dict, casts: dict):
        extra = set(section) - set(casts)
        if extra:
            raise ConfigError(f"unknown keys in {cls.__name__}: {sorted(extra)}")
        kwargs = {k: cast(section[k]) for k, cast in casts.items() if k in section and section[k] is not None}
        for k, cast in casts.items():
            if k in section and section[k] is None:
                kwargs[k] = None
        return cls(**kwargs)

    model = build(
        ModelConfig,
        _section(doc, "model"),
        {
            "family": str,
            "init": str,
            "init_scale": float,
            "lattice_d": int,
            "train_final_layer": bool,
            "snap_to_lattice": bool,
        },
    )
    cost_doc = dict(_section(doc, "cost"))
    try:
        kernel = dict_to_spec(cost_doc.pop("kernel")) if "kernel" in cost_doc else KernelSpec("gaussian")
    except UsageError as err:
        raise ConfigError(f"cost.kernel: {err}") from None
    score = build(ScoreConfig, cost_doc.pop("score", {}), {"method": str, "ridge": float, "eigenvectors": int})
    cost = build(CostConfig, cost_doc, {"kind": str, "epsilon": float})
    cost = replace(cost, kernel=kernel, score=score)
    data_doc = dict(_section(doc, "data"))
    modes = data_doc.pop("modes", None)
    data = build(
        DataConfig,
        data_doc,
        {
            "source": str,
            "file": str,
            "num_modes": int,
            "retention": float,
            "samples": int,
            "train_samples": int,
        },
    )
    if modes is not None:
        data = replace(data, modes=tuple(str(m) for m in modes))
    optimizer = build(OptimizerConfig, _section(doc, "optimizer"), {"lr": float, "beta1": float, "beta2": float, "eps": float})
    loop = build(
        LoopConfig,
        _section(doc, "loop"),
        {"epochs": int, "model_samples": int, "batch": int, "expectations": str},
    )
    if "n" not in doc:
        raise ConfigError("config is missing the required field 'n'")
    cfg = RunConfig(
        n=int(doc["n"]),
        seed=int(doc.get("seed", 0)),
        threads=int(doc.get("threads", 1)),
        out=str(doc["out"]) if doc.get("out") is not None else None,
        model=model,
        cost=cost,
        data=data,
        optimizer=optimizer,
        loop=loop,
    )
    return validate_config(cfg)


def load_config(path) -> RunConfig:
    """Read a JSON config file and materialize all defaults."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path} is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return config_from_dict(doc)


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")

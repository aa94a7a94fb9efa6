"""Command-line front end: train, compile, bench, oracle-check.

Every run writes a self-contained record (config echo, seed, package
version, backend) plus a plottable CSV trace, so an external tool can
reproduce or plot it without this process.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, model, sim
from ._core import BACKEND
from ._rng import as_generator, spawn_seed
from .compile import compile_run, random_compile_job, _default_config as _compile_config
from .config import (
    CostConfig,
    RunConfig,
    ScoreConfig,
    config_to_dict,
    load_config,
    save_config,
    validate_config,
)
from .data import save_dataset
from .errors import CapacityError, ConfigError, ShapeError, UsageError
from .kernels import KernelSpec
from .metrics import bound_harness
from .train import run_training, trace_csv

__all__ = ["main", "load_config"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bornforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bornforge {__version__} ({BACKEND} core)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_model: bool) -> None:
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="gradient worker threads (default: env BORNFORGE_THREADS or 1)",
        )
        if with_model:
            p.add_argument("--config", type=Path, default=None, help="JSON run configuration")
            p.add_argument("--n", type=int, default=None, help="qubit count")
            p.add_argument("--epochs", type=int, default=None)
            p.add_argument("--cost", choices=("mmd", "stein", "sinkhorn"), default=None)
            p.add_argument("--kernel", choices=("gaussian", "hamming", "quantum"), default=None)
            p.add_argument("--score", choices=("exact", "identity", "spectral"), default=None)
            p.add_argument("--epsilon", type=float, default=None, help="entropic regularization strength")

    t = sub.add_parser("train", help="train a circuit against a target distribution")
    common(t, with_model=True)

    c = sub.add_parser("compile", help="fit a mixer-constrained ansatz to a random target circuit")
    common(c, with_model=True)

    b = sub.add_parser("bench", help="check the metric inequality chain on random distribution pairs")
    b.add_argument("--n", type=int, default=2)
    b.add_argument("--pairs", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--epsilon", type=float, default=0.1)

    o = sub.add_parser("oracle-check", help="compare the simulator and gradients against dense oracles")
    o.add_argument("--n", type=int, default=3)
    o.add_argument("--seed", type=int, default=1)
    o.add_argument("--trials", type=int, default=20)
    return parser


def _default_threads() -> int:
    raw = os.environ.get("BORNFORGE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"BORNFORGE_THREADS must be an integer, got {raw!r}") from exc


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.n is not None:
        cfg = dataclasses.replace(cfg, n=args.n)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    threads = args.threads if args.threads is not None else (_default_threads() if cfg.threads == 1 else cfg.threads)
    cfg = dataclasses.replace(cfg, threads=threads)
    if args.epochs is not None:
        cfg = dataclasses.replace(cfg, loop=dataclasses.replace(cfg.loop, epochs=args.epochs))
    cost = cfg.cost
    if args.cost is not None:
        cost = dataclasses.replace(cost, kind=args.cost)
    if args.kernel is not None:
        cost = dataclasses.replace(cost, kernel=dataclasses.replace(cost.kernel, kind=args.kernel))
    if args.score is not None:
        cost = dataclasses.replace(cost, score=ScoreConfig(method=args.score))
    if args.epsilon is not None:
        cost = dataclasses.replace(cost, epsilon=args.epsilon)
    if cost is not cfg.cost:
        cfg = dataclasses.replace(cfg, cost=cost)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out=str(args.out))
    return validate_config(cfg)


def _out_dir(cfg: RunConfig, command: str) -> Path:
    name = cfg.out if cfg.out else f"{command}-n{cfg.n}-{cfg.cost.kind}-seed{cfg.seed}"
    path = Path(name)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_run(out: Path, record, cfg: RunConfig) -> None:
    (out / "record.json").write_text(record.to_json() + "\n")
    (out / "trace.csv").write_text(trace_csv(record))
    save_config(cfg, out / "config.json")
    save_dataset(out / "dataset.txt", record.dataset, record.target, record.dataset_seed)


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = _apply_overrides(cfg, args)
    record = run_training(cfg)
    out = _out_dir(cfg, "train")
    _write_run(out, record, cfg)
    first, last = record.rows[0], record.rows[-1]
    print(f"trained n={cfg.n} cost={cfg.cost.kind} seed={cfg.seed} epochs={cfg.loop.epochs}")
    print(f"cost_train {first.cost_train:.6f} -> {last.cost_train:.6f}")
    if not np.isnan(last.tv):
        print(f"tv         {first.tv:.6f} -> {last.tv:.6f}")
    print(f"artifacts in {out}/")
    return 0


def _cmd_compile(args: argparse.Namespace) -> int:
    base = load_config(args.config) if args.config else _compile_config(args.n or 2, args.seed or 0)
    cfg = _apply_overrides(base, args)
    job = random_compile_job(cfg.n, cfg.seed, config=cfg)
    report = compile_run(job)
    out = _out_dir(cfg, "compile")
    _write_run(out, report.record, cfg)
    (out / "report.txt").write_text(report.report_text())
    print(report.report_text())
    print(f"artifacts in {out}/")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    rng = as_generator(args.seed)
    dim = 1 << args.n
    tally: dict[str, list[int]] = {}
    worst: dict[str, float] = {}
    for _ in range(args.pairs):
        p = sim.ProbabilityVector(args.n, rng.dirichlet(np.ones(dim)))
        q = sim.ProbabilityVector(args.n, rng.dirichlet(np.ones(dim)))
        report = bound_harness(p, q, eps=args.epsilon)
        for check in report.checks:
            held, applicable = tally.setdefault(check.name, [0, 0])
            if check.holds is None:
                continue
            tally[check.name] = [held + int(check.holds), applicable + 1]
            margin = check.rhs - check.lhs
            worst[check.name] = min(worst.get(check.name, np.inf), margin)
    print(f"inequality harness: n={args.n}, pairs={args.pairs}, epsilon={args.epsilon}")
    all_hold = True
    for name, (held, applicable) in tally.items():
        ok = held == applicable
        all_hold &= ok
        print(f"  {name:<32} {held}/{applicable} hold   worst margin {worst.get(name, np.inf):.3e}")
    print("all applicable bounds hold" if all_hold else "BOUND VIOLATION DETECTED")
    return 0 if all_hold else 1


def _dense_distribution(params: model.CircuitParams) -> np.ndarray:
    """Build the full 2^n x 2^n circuit unitary and read off |amplitudes|^2."""
    from scipy.linalg import expm

    n = params.n
    dim = 1 << n
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    hn = np.array([[1.0]])
    for _ in range(n):
        hn = np.kron(hn, h1)
    codes = np.arange(dim)
    z = 1.0 - 2.0 * ((codes[:, None] >> np.arange(n)[None, :]) & 1)
    phase = z @ params.b
    for i in range(n):
        for jq in range(i + 1, n):
            phase = phase + params.j[i, jq] * z[:, i] * z[:, jq]
    diag = np.diag(np.exp(1j * phase))
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    zp = np.array([[1, 0], [0, -1]], dtype=complex)
    final = np.array([[1.0]], dtype=complex)
    for k in range(n - 1, -1, -1):
        gen = params.gamma[k] * x + params.delta[k] * y + params.sigma[k] * zp
        final = np.kron(final, expm(1j * gen))
    state = final @ diag @ hn @ np.eye(dim)[:, 0]
    return np.abs(state) ** 2


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    rng = as_generator(args.seed)
    n = args.n
    worst_dense = 0.0
    for _ in range(args.trials):
        j = rng.uniform(-np.pi, np.pi, size=(n, n))
        j = np.triu(j, 1)
        j = j + j.T
        params = model.make_params(
            n,
            j,
            rng.uniform(-np.pi, np.pi, size=n),
            gamma=rng.uniform(-np.pi, np.pi, size=n),
            delta=rng.uniform(-np.pi, np.pi, size=n),
            sigma=rng.uniform(-np.pi, np.pi, size=n),
        )
        dev = np.max(np.abs(model.build_distribution(params).probs - _dense_distribution(params)))
        worst_dense = max(worst_dense, dev)

    j = rng.uniform(-np.pi / 4, np.pi / 4, size=(n, n))
    j = np.triu(j, 1)
    j = j + j.T
    params = model.methods_ansatz(n, j, rng.uniform(-np.pi / 4, np.pi / 4, size=n))
    h = 1e-5
    worst_fd = 0.0
    for idx in model.param_indices(n):
        if not params.trainable[model.flat_position(n, idx)]:
            continue
        grad = model.prob_gradient(params, idx)
        theta = model.get_entry(params, idx)
        up = model.build_distribution(model.set_entry(params, idx, theta + h)).probs
        dn = model.build_distribution(model.set_entry(params, idx, theta - h)).probs
        worst_fd = max(worst_fd, float(np.max(np.abs(grad - (up - dn) / (2 * h)))))

    gate = sim.final_layer_unitary((model.IQP_ANGLE, 0.0, model.IQP_ANGLE))
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    worst_gate = float(np.max(np.abs(gate - 1j * h1)))

    print(f"oracle check: n={n}, seed={args.seed}, trials={args.trials}")
    print(f"  dense-unitary simulator deviation   {worst_dense:.3e}  (threshold 1e-10)")
    print(f"  parameter-shift vs finite difference {worst_fd:.3e}  (threshold 1e-6)")
    print(f"  fixed final layer vs i*Hadamard      {worst_gate:.3e}  (threshold 1e-12)")
    ok = worst_dense < 1e-10 and worst_fd < 1e-6 and worst_gate < 1e-12
    print("all oracles agree" if ok else "ORACLE DISAGREEMENT")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "train": _cmd_train,
        "compile": _cmd_compile,
        "bench": _cmd_bench,
        "oracle-check": _cmd_oracle_check,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (ShapeError, UsageError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

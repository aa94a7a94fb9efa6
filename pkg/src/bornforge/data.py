"""Synthetic targets (noisy mode mixtures), empirical distributions, dataset files.

A target is a mixture over T anchor bitstrings: a sample picks an anchor
uniformly and keeps each bit with probability p (flips it with 1-p), giving
pi(y) = (1/T) sum_k p^(n - H(s_k, y)) (1-p)^H(s_k, y).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _core, sim
from ._rng import as_generator
from .errors import ShapeError, UsageError

DEFAULT_RETENTION = 0.9


def default_mode_count(n: int) -> int:
    return min(2 ** (n - 1), 5)


@dataclass(frozen=True)
class TargetSpec:
    n: int
    modes: tuple[int, ...]
    p: float = DEFAULT_RETENTION

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 1.0:
            raise UsageError(f"retention probability {self.p} outside (0, 1]")
        if len(self.modes) == 0:
            raise UsageError("target needs at least one mode")
        for m in self.modes:
            if not 0 <= m < (1 << self.n):
                raise UsageError(f"mode code {m} outside [0, 2^{self.n})")


@dataclass(frozen=True)
class EmpiricalDist:
    """Unique codes with multiplicities."""

    n: int
    codes: np.ndarray
    counts: np.ndarray
    total: int


@dataclass(frozen=True)
class WeightedSupport:
    """Strictly positive weights summing to one over distinct codes."""

    n: int
    codes: np.ndarray
    weights: np.ndarray


def random_target(n: int, seed, num_modes: int | None = None, p: float = DEFAULT_RETENTION) -> TargetSpec:
    """Distinct anchor strings drawn uniformly at random."""
    t = default_mode_count(n) if num_modes is None else int(num_modes)
    if not 1 <= t <= (1 << n):
        raise UsageError(f"mode count {t} outside [1, 2^{n}]")
    rng = as_generator(seed)
    modes = rng.choice(1 << n, size=t, replace=False)
    return TargetSpec(n, tuple(int(m) for m in sorted(modes)), p)


def target_pmf(tspec: TargetSpec) -> sim.ProbabilityVector:
    """Exact mixture probabilities over all 2^n outcomes."""
    n = tspec.n
    codes = np.arange(1 << n, dtype=np.int64)
    d = _core.hamming_matrix(codes, np.asarray(tspec.modes, dtype=np.int64)).astype(np.float64)
    probs = np.mean(tspec.p ** (n - d) * (1.0 - tspec.p) ** d, axis=1)
    return sim.ProbabilityVector(n, probs)


def sample_target(tspec: TargetSpec, count: int, seed) -> sim.SampleSet:
    """Draw samples by anchor choice plus independent bit flips."""
    if count < 0:
        raise ShapeError(f"sample count {count} must be nonnegative")
    rng = as_generator(seed)
    anchors = np.asarray(tspec.modes, dtype=np.int64)[rng.integers(0, len(tspec.modes), size=count)]
    flips = rng.random((count, tspec.n)) < (1.0 - tspec.p)
    flip_codes = flips @ (1 << np.arange(tspec.n, dtype=np.int64))
    return sim.SampleSet(tspec.n, anchors ^ flip_codes)


def empirical(samples: sim.SampleSet) -> EmpiricalDist:
    codes, counts = np.unique(samples.codes, return_counts=True)
    return EmpiricalDist(samples.n, codes, counts, int(counts.sum()))


def empirical_pmf(samples: sim.SampleSet) -> sim.ProbabilityVector:
    """Relative frequencies over the full outcome space."""
    probs = np.bincount(samples.codes, minlength=1 << samples.n).astype(np.float64)
    if probs.sum() == 0:
        raise UsageError("cannot form an empirical distribution from zero samples")
    return sim.ProbabilityVector(samples.n, probs / probs.sum())


def to_weighted_support(obj) -> WeightedSupport:
    """Coerce a SampleSet, EmpiricalDist or ProbabilityVector to its support."""
    if isinstance(obj, WeightedSupport):
        return obj
    if isinstance(obj, sim.SampleSet):
        obj = empirical(obj)
    if isinstance(obj, EmpiricalDist):
        if obj.total == 0:
            raise UsageError("empty sample set has no support")
        return WeightedSupport(obj.n, obj.codes, obj.counts / obj.total)
    if isinstance(obj, sim.ProbabilityVector):
        nz = np.flatnonzero(obj.probs > 0.0)
        return WeightedSupport(obj.n, nz.astype(np.int64), obj.probs[nz])
    raise UsageError(f"cannot interpret {type(obj).__name__} as a weighted support")


def split_train_test(samples: sim.SampleSet, n_train: int, seed) -> tuple[sim.SampleSet, sim.SampleSet]:
    """Disjoint seeded split; permutation is deterministic in the seed."""
    total = len(samples)
    if not 0 < n_train < total:
        raise UsageError(f"train size {n_train} must be inside (0, {total})")
    order = as_generator(seed).permutation(total)
    return (
        sim.SampleSet(samples.n, samples.codes[order[:n_train]]),
        sim.SampleSet(samples.n, samples.codes[order[n_train:]]),
    )


HEADER_TAG = "# bornforge-dataset "


def save_dataset(path, samples: sim.SampleSet, tspec: TargetSpec | None = None, seed: int | None = None) -> None:
    """One bitstring per line (qubit 0 leftmost) under a JSON header line."""
    meta: dict = {"n": samples.n, "count": len(samples)}
    if tspec is not None:
        meta["p"] = tspec.p
        meta["modes"] = [sim.code_to_string(m, tspec.n) for m in tspec.modes]
    if seed is not None:
        meta["seed"] = int(seed)
    lines = [HEADER_TAG + json.dumps(meta, sort_keys=True)]
    lines += [sim.code_to_string(int(c), samples.n) for c in samples.codes]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path) -> tuple[sim.SampleSet, TargetSpec | None]:
    """Read a dataset file; plain bitstring files (no header) are accepted."""
    with open(path, encoding="ascii") as fh:
        raw = [line.strip() for line in fh if line.strip()]
    tspec = None
    if raw and raw[0].startswith(HEADER_TAG):
        meta = json.loads(raw[0][len(HEADER_TAG):])
        raw = raw[1:]
        if "modes" in meta:
            tspec = TargetSpec(
                int(meta["n"]),
                tuple(sim.string_to_code(m) for m in meta["modes"]),
                float(meta["p"]),
            )
    if not raw:
        raise ShapeError(f"dataset file {path} holds no samples")
    n = len(raw[0])
    for line in raw:
        if len(line) != n:
            raise ShapeError("dataset bitstrings have inconsistent lengths")
    codes = np.array([sim.string_to_code(line) for line in raw], dtype=np.int64)
    return sim.SampleSet(n, codes), tspec

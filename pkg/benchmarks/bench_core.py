"""Compare the compiled core against the pure-NumPy fallback.

Run:  python3 benchmarks/bench_core.py [--repeat 5]

Covers the three hot paths behind the `_core` seam: Hamming Gram matrices
(every kernel evaluation), Ising phase tables (every circuit build), and
log-domain Sinkhorn iterations (every entropic cost/gradient call).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bornforge import _corepure

try:
    from bornforge import _corefast
except ImportError:  # pragma: no cover - extension not built
    _corefast = None


def _time(fn, *args, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads(rng: np.random.Generator):
    codes_a = rng.integers(0, 1 << 12, size=2000, dtype=np.int64)
    codes_b = rng.integers(0, 1 << 12, size=2000, dtype=np.int64)
    yield "hamming_matrix 2000x2000 (n=12)", "hamming_matrix", (codes_a, codes_b)

    n = 12
    j = rng.normal(size=(n, n))
    j = np.triu(j, 1)
    j = j + j.T
    yield f"phase_table n={n} (4096 amplitudes)", "phase_table", (j, rng.normal(size=n))

    m = 256
    logp = np.log(rng.dirichlet(np.ones(m)))
    logq = np.log(rng.dirichlet(np.ones(m)))
    cmat = _corepure.hamming_matrix(
        rng.integers(0, 1 << 10, size=m, dtype=np.int64),
        rng.integers(0, 1 << 10, size=m, dtype=np.int64),
    ).astype(np.float64)
    yield "sinkhorn_cross 256x256 eps=0.5", "sinkhorn_cross", (logp, logq, cmat, 0.5, 2000, 1e-9)
    yield "sinkhorn_auto 256x256 eps=0.5", "sinkhorn_auto", (logp, cmat, 0.5, 2000, 1e-9)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _corefast is None:
        print("compiled core not available; showing pure backend only")
    rng = np.random.default_rng(args.seed)
    rows = []
    for label, name, work in _workloads(rng):
        pure_t = _time(getattr(_corepure, name), *work, repeat=args.repeat)
        if _corefast is not None:
            fast_t = _time(getattr(_corefast, name), *work, repeat=args.repeat)
            fast_out = getattr(_corefast, name)(*work)
            pure_out = getattr(_corepure, name)(*work)
            fa = fast_out[0] if isinstance(fast_out, tuple) else fast_out
            pa = pure_out[0] if isinstance(pure_out, tuple) else pure_out
            agree = np.max(np.abs(np.asarray(fa, dtype=np.float64) - np.asarray(pa, dtype=np.float64)))
            rows.append((label, pure_t, fast_t, pure_t / fast_t, agree))
        else:
            rows.append((label, pure_t, None, None, None))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'pure (ms)':>10}  {'fast (ms)':>10}  {'speedup':>8}  {'max |diff|':>10}")
    for label, pure_t, fast_t, speedup, agree in rows:
        if fast_t is None:
            print(f"{label:<{width}}  {pure_t * 1e3:>10.3f}  {'-':>10}  {'-':>8}  {'-':>10}")
        else:
            print(f"{label:<{width}}  {pure_t * 1e3:>10.3f}  {fast_t * 1e3:>10.3f}  {speedup:>7.2f}x  {agree:>10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

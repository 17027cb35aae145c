#!/usr/bin/env python3
"""Benchmark the compiled path-simulation kernel against the pure-Python fallback.

Asserts bit-identical outputs (both backends call the same libm and evaluate
expressions in the same order), then reports throughput for the inverse-
transform event-age kernel and the full illness-death path kernel.

Usage: python benchmarks/bench_paths.py [n_subjects]
"""

import sys
import time

import numpy as np

from mrrkit import DEFAULT_RATES
from mrrkit._kernels import _pysim, _rng

try:
    from mrrkit._kernels import _core
except ImportError:
    _core = None


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main(n: int = 500_000) -> int:
    rates = DEFAULT_RATES
    key = _rng.derive_key(12345)
    streams = np.arange(n, dtype=np.uint64)
    u = [_rng.uniforms(key, 1, streams, slot) for slot in (1, 2, 3)]
    starts = np.zeros(n)

    coeffs = (rates.incidence.c0, rates.incidence.c1,
              rates.mortality_healthy.c0, rates.mortality_healthy.c1,
              rates.mortality_diseased.c0, rates.mortality_diseased.c1,
              110.0)

    backends = [("python", _pysim)]
    if _core is not None:
        backends.insert(0, ("c", _core))
    else:
        print("compiled kernel not built; benchmarking the fallback only")

    print(f"n = {n} subjects")
    print(f"{'kernel':<22} {'backend':<8} {'best time':>10} {'throughput':>16}")
    results = {}
    for name, impl in backends:
        ages, dt = timed(impl.event_ages, starts, u[1],
                         rates.mortality_healthy.c0, rates.mortality_healthy.c1)
        results[("event_ages", name)] = (ages, dt)
        print(f"{'event_ages':<22} {name:<8} {dt:>9.3f}s {n / dt:>12.0f} /s")
    for name, impl in backends:
        paths, dt = timed(impl.illness_death_paths, *u, *coeffs)
        results[("paths", name)] = (paths, dt)
        print(f"{'illness_death_paths':<22} {name:<8} {dt:>9.3f}s {n / dt:>12.0f} /s")

    if _core is not None:
        a = results[("event_ages", "c")][0]
        b = results[("event_ages", "python")][0]
        assert np.array_equal(a, b), "event_ages outputs differ between backends"
        (on_c, d_c) = results[("paths", "c")][0]
        (on_p, d_p) = results[("paths", "python")][0]
        assert np.array_equal(on_c, on_p, equal_nan=True), "onset ages differ"
        assert np.array_equal(d_c, d_p), "death ages differ"
        print("bit-identical outputs: OK")
        s1 = results[("event_ages", "python")][1] / results[("event_ages", "c")][1]
        s2 = results[("paths", "python")][1] / results[("paths", "c")][1]
        print(f"speedup: event_ages {s1:.1f}x, illness_death_paths {s2:.1f}x")
    return 0


if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 500_000
    raise SystemExit(main(n))

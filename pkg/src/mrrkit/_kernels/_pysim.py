"""Pure-Python fallback for the path-simulation kernel.

Mirrors the compiled core statement for statement. Both backends call the
same libm (math module here, libc.math in the core) and evaluate expressions
in the same order, so their outputs are bit-identical; the benchmark in
benchmarks/bench_paths.py asserts this. Expect roughly two orders of
magnitude less throughput than the compiled core.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_NAN = float("nan")
_INF = math.inf


def _exp(x: float) -> float:
    # libm exp returns inf on overflow; math.exp raises instead.
    try:
        return math.exp(x)
    except OverflowError:
        return _INF


def _event_age(start: float, u: float, c0: float, c1: float) -> float:
    """Age at which the integrated exp(c0 + c1*a) hazard from ``start`` hits -log(u)."""
    e_dev = -math.log(u)
    if c1 == 0.0:
        return start + e_dev * _exp(-c0)
    arg = c1 * e_dev * _exp(-(c0 + c1 * start))
    if arg <= -1.0:
        return _INF
    return start + math.log1p(arg) / c1


def event_ages(start_ages: np.ndarray, u: np.ndarray, c0: float, c1: float) -> np.ndarray:
    """Vectorized inverse-transform event ages (1-d float64 in, float64 out)."""
    start_ages = np.ascontiguousarray(start_ages, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    out = np.empty(start_ages.shape[0], dtype=np.float64)
    for i in range(start_ages.shape[0]):
        out[i] = _event_age(start_ages[i], u[i], c0, c1)
    return out


def illness_death_paths(u_onset, u_death_healthy, u_death_diseased,
                        lam_c0, lam_c1, mu0_c0, mu0_c1, mu1_c0, mu1_c1,
                        horizon):
    """Simulate one illness-death path per deviate triple.

    Returns (onset_age, death_age); onset_age is NaN for subjects who die (or
    hit the horizon) without the condition. Any event age at or beyond the
    horizon truncates the path to death at exactly the horizon.
    """
    u_onset = np.ascontiguousarray(u_onset, dtype=np.float64)
    u_death_healthy = np.ascontiguousarray(u_death_healthy, dtype=np.float64)
    u_death_diseased = np.ascontiguousarray(u_death_diseased, dtype=np.float64)
    n = u_onset.shape[0]
    onset_out = np.empty(n, dtype=np.float64)
    death_out = np.empty(n, dtype=np.float64)
    for i in range(n):
        onset = _event_age(0.0, u_onset[i], lam_c0, lam_c1)
        death_h = _event_age(0.0, u_death_healthy[i], mu0_c0, mu0_c1)
        if onset < death_h and onset < horizon:
            death_d = _event_age(onset, u_death_diseased[i], mu1_c0, mu1_c1)
            onset_out[i] = onset
            death_out[i] = death_d if death_d < horizon else horizon
        else:
            onset_out[i] = _NAN
            death_out[i] = death_h if death_h < horizon else horizon
    return onset_out, death_out

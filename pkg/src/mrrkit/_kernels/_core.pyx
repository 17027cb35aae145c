# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled path-simulation kernel.

Statement-for-statement mirror of the pure-Python fallback in _pysim.py;
compiled with -ffp-contract=off so that both backends produce bit-identical
doubles (they share libm).
"""

from libc.math cimport exp, log, log1p, INFINITY, NAN

import numpy as np

BACKEND = "c"


cdef inline double _event_age(double start, double u, double c0, double c1) noexcept nogil:
    cdef double e_dev = -log(u)
    cdef double arg
    if c1 == 0.0:
        return start + e_dev * exp(-c0)
    arg = c1 * e_dev * exp(-(c0 + c1 * start))
    if arg <= -1.0:
        return INFINITY
    return start + log1p(arg) / c1


def event_ages(start_ages, u, double c0, double c1):
    """Vectorized inverse-transform event ages (1-d float64 in, float64 out)."""
    cdef double[::1] s = np.ascontiguousarray(start_ages, dtype=np.float64)
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    out_arr = np.empty(s.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, n = s.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _event_age(s[i], uu[i], c0, c1)
    return out_arr


def illness_death_paths(u_onset, u_death_healthy, u_death_diseased,
                        double lam_c0, double lam_c1,
                        double mu0_c0, double mu0_c1,
                        double mu1_c0, double mu1_c1,
                        double horizon):
    """Simulate one illness-death path per deviate triple.

    Returns (onset_age, death_age); onset_age is NaN for subjects who die (or
    hit the horizon) without the condition.
    """
    cdef double[::1] u_on = np.ascontiguousarray(u_onset, dtype=np.float64)
    cdef double[::1] u_dh = np.ascontiguousarray(u_death_healthy, dtype=np.float64)
    cdef double[::1] u_dd = np.ascontiguousarray(u_death_diseased, dtype=np.float64)
    cdef Py_ssize_t i, n = u_on.shape[0]
    onset_arr = np.empty(n, dtype=np.float64)
    death_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] onset_out = onset_arr
    cdef double[::1] death_out = death_arr
    cdef double onset, death_h, death_d
    with nogil:
        for i in range(n):
            onset = _event_age(0.0, u_on[i], lam_c0, lam_c1)
            death_h = _event_age(0.0, u_dh[i], mu0_c0, mu0_c1)
            if onset < death_h and onset < horizon:
                death_d = _event_age(onset, u_dd[i], mu1_c0, mu1_c1)
                onset_out[i] = onset
                death_out[i] = death_d if death_d < horizon else horizon
            else:
                onset_out[i] = NAN
                death_out[i] = death_h if death_h < horizon else horizon
    return onset_arr, death_arr

"""Cross-sectional survey of a simulated population.

Survey times are drawn uniformly on a calendar window; at each time one
subject is drawn uniformly from those alive (with replacement across survey
times). Each record is (t, age, status, duration): status is 1 iff the
condition is present at the survey age, and duration is years since onset
(0 for status 0). The CSV schema doubles as the ingestion format for external
cross-sectional data, so the estimators run on real surveys too.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cohort import Population
from .errors import SurveyWindowError

DEFAULT_SURVEY_WINDOW = (1980.0, 1990.0)

# Uniform subject picking is by rejection against the alive predicate; with
# any reasonable window the acceptance rate is the alive fraction of the
# population, so this cap is never approached.
MAX_PICK_ATTEMPTS = 4096


@dataclass(frozen=True)
class Quadruple:
    """One survey record."""

    t: float
    age: float
    delta: int
    duration: float

    def __post_init__(self):
        if self.delta not in (0, 1):
            raise ValueError("delta must be 0 or 1")
        if not self.age > 0.0:
            raise ValueError("age must be positive")
        if self.delta == 0 and self.duration != 0.0:
            raise ValueError("duration must be 0 for status-0 records")
        if not 0.0 <= self.duration <= self.age:
            raise ValueError("duration must lie in [0, age]")


@dataclass(frozen=True)
class Survey:
    """Array-backed collection of survey records."""

    t: np.ndarray
    age: np.ndarray
    delta: np.ndarray
    duration: np.ndarray
    seed: int | None = None
    subject_index: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.t.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Quadruple:
        return Quadruple(
            t=float(self.t[i]),
            age=float(self.age[i]),
            delta=int(self.delta[i]),
            duration=float(self.duration[i]),
        )

    def __iter__(self):
        for i in range(self.n):
            yield self[i]

    def to_csv(self, path) -> None:
        """Columns: t, a, delta, d."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "a", "delta", "d"])
            for i in range(self.n):
                w.writerow([
                    repr(float(self.t[i])),
                    repr(float(self.age[i])),
                    int(self.delta[i]),
                    repr(float(self.duration[i])),
                ])

    @classmethod
    def from_csv(cls, path) -> "Survey":
        ts, ages, deltas, ds = [], [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                ts.append(float(row["t"]))
                ages.append(float(row["a"]))
                deltas.append(int(row["delta"]))
                ds.append(float(row["d"]))
        return cls(
            t=np.asarray(ts),
            age=np.asarray(ages),
            delta=np.asarray(deltas, dtype=np.uint8),
            duration=np.asarray(ds),
        )


def draw_survey(pop: Population, n: int,
                survey_window: tuple[float, float] = DEFAULT_SURVEY_WINDOW,
                seed: int = 0, workers: int = 1) -> Survey:
    """Draw ``n`` records from subjects alive at uniform survey times.

    Subjects are selected with replacement across survey times (one subject
    may appear at several times). Raises SurveyWindowError if any drawn time
    has no alive subjects. Deterministic for fixed (pop, n, window, seed),
    independent of ``workers``.
    """
    if n < 1:
        raise ValueError(f"survey size must be >= 1, got {n}")
    t_lo, t_hi = float(survey_window[0]), float(survey_window[1])
    if not t_lo <= t_hi:
        raise ValueError(f"survey window must satisfy t_lo <= t_hi, got {survey_window}")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    key = _kernels.derive_key(seed)
    n_pop = len(pop)
    birth = pop.birth_time
    death_time = pop.death_time

    streams = np.arange(n, dtype=np.uint64)
    u_t = _kernels.uniforms(key, _kernels.PURPOSE_SURVEY_TIME, streams, 0)
    t = t_lo + (t_hi - t_lo) * u_t

    # Exact alive counts per survey time: fail fast on a misconfigured window.
    births_sorted = np.sort(birth)
    deaths_sorted = np.sort(death_time)
    alive = (np.searchsorted(births_sorted, t, side="right")
             - np.searchsorted(deaths_sorted, t, side="right"))
    if np.any(alive == 0):
        bad = float(t[np.argmax(alive == 0)])
        raise SurveyWindowError(
            f"no subjects alive at drawn survey time {bad:.3f}; "
            f"window {survey_window} does not overlap the population's lifetimes"
        )

    def pick(idx: np.ndarray) -> np.ndarray:
        selected = np.full(idx.shape[0], -1, dtype=np.int64)
        pending = np.arange(idx.shape[0])
        for attempt in range(MAX_PICK_ATTEMPTS):
            u = _kernels.uniforms(key, _kernels.PURPOSE_SURVEY_PICK,
                                  streams[idx[pending]], attempt)
            cand = np.minimum((u * n_pop).astype(np.int64), n_pop - 1)
            tp = t[idx[pending]]
            ok = (birth[cand] <= tp) & (tp < death_time[cand])
            selected[pending[ok]] = cand[ok]
            pending = pending[~ok]
            if pending.size == 0:
                return selected
        raise SurveyWindowError(
            f"subject picking did not accept within {MAX_PICK_ATTEMPTS} attempts; "
            "the alive fraction at some survey times is pathologically small"
        )

    bounds = np.linspace(0, n, num=min(workers, n) + 1, dtype=int)
    spans = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    sel = np.concatenate([pick(np.arange(lo, hi)) for lo, hi in spans])

    age = t - birth[sel]
    onset = pop.onset_age[sel]
    has_onset = ~np.isnan(onset)
    delta = has_onset & (onset <= age)
    duration = np.where(delta, age - np.where(has_onset, onset, 0.0), 0.0)

    return Survey(
        t=t,
        age=age,
        delta=delta.astype(np.uint8),
        duration=duration,
        seed=seed,
        subject_index=sel,
    )

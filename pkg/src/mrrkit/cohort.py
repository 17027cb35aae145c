"""Monte Carlo simulation of subjects through the illness-death model.

Each subject is followed from birth to death with no censoring. Transition
ages are drawn by inverse-transform sampling of the integrated Gompertz
hazards: a candidate onset age (incidence) and a healthy death age compete;
if onset comes first the death age is redrawn from the diseased mortality
conditional on survival to onset. Deviates come from counter-based streams
keyed by (seed, subject index), so populations are bit-reproducible for any
worker count.
"""

from __future__ import annotations

import csv
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .rates import MAX_AGE, GompertzRate, RateSet

DEFAULT_BIRTH_WINDOW = (1885.0, 1965.0)


@dataclass(frozen=True)
class LifePath:
    """One subject's simulated history."""

    birth_time: float
    onset_age: float | None
    death_age: float

    def __post_init__(self):
        if not self.death_age > 0.0:
            raise ValueError("death_age must be positive")
        if self.onset_age is not None and not 0.0 < self.onset_age < self.death_age:
            raise ValueError("onset_age must lie strictly between 0 and death_age")

    @property
    def death_time(self) -> float:
        return self.birth_time + self.death_age

    def alive_at(self, t: float) -> bool:
        return self.birth_time <= t < self.death_time

    def diseased_at_age(self, age: float) -> bool:
        return self.onset_age is not None and self.onset_age <= age


def sample_gompertz_event_age(rate: GompertzRate, start_age: float, u: float) -> float:
    """Inverse-transform event age for an exp(c0 + c1*a) hazard.

    Returns the age a >= start_age with integrated hazard over [start_age, a]
    equal to -log(u). u must lie in (0, 1]; u = 1 gives start_age exactly.
    The result may be infinite (or beyond any horizon) when the hazard's total
    mass left of the asymptote is less than the drawn deviate; callers treat
    ages beyond their horizon as "event never happens".
    """
    if not u > 0.0:
        raise ValueError("u must be in (0, 1]")
    if u > 1.0:
        raise ValueError("u must be in (0, 1]")
    if start_age < 0.0:
        raise ValueError("start_age must be nonnegative")
    return _kernels.event_ages(
        np.array([start_age]), np.array([u]), rate.c0, rate.c1
    )[0]


@dataclass(frozen=True)
class Population:
    """Array-backed collection of simulated life paths.

    ``onset_age`` is NaN for subjects who never enter the diseased state.
    Reproducible bit-exactly from (seed, n, rates, birth_window).
    """

    birth_time: np.ndarray
    onset_age: np.ndarray
    death_age: np.ndarray
    seed: int | None = None
    rates: RateSet | None = field(default=None, repr=False)
    birth_window: tuple[float, float] | None = None

    def __len__(self) -> int:
        return self.birth_time.shape[0]

    def __getitem__(self, i: int) -> LifePath:
        onset = self.onset_age[i]
        return LifePath(
            birth_time=float(self.birth_time[i]),
            onset_age=None if math.isnan(onset) else float(onset),
            death_age=float(self.death_age[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def paths(self):
        """Iterator over LifePath views (materialize with list() if needed)."""
        return iter(self)

    @property
    def death_time(self) -> np.ndarray:
        return self.birth_time + self.death_age

    def status_counts_at_age(self, age: float) -> tuple[int, int]:
        """(alive, diseased) counts at an exact age, over every subject."""
        alive = self.death_age > age
        diseased = alive & ~np.isnan(self.onset_age) & (self.onset_age <= age)
        return int(alive.sum()), int(diseased.sum())

    def prevalence_at_age(self, ages):
        """Fraction diseased among subjects alive at each age (NaN if none alive)."""
        ages = np.atleast_1d(np.asarray(ages, dtype=float))
        out = np.empty(ages.shape, dtype=float)
        for k, a in enumerate(ages):
            alive, diseased = self.status_counts_at_age(float(a))
            out[k] = diseased / alive if alive else np.nan
        return out if out.shape[0] > 1 else float(out[0])

    def digest(self) -> str:
        """SHA-256 over the canonical little-endian array bytes."""
        h = hashlib.sha256(b"mrrkit-population-v1")
        for arr in (self.birth_time, self.onset_age, self.death_age):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return h.hexdigest()

    def to_csv(self, path) -> None:
        """Columns: subject_id, birth_time, onset_age (empty if none), death_age."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["subject_id", "birth_time", "onset_age", "death_age"])
            for i in range(len(self)):
                onset = self.onset_age[i]
                w.writerow([
                    i,
                    repr(float(self.birth_time[i])),
                    "" if math.isnan(onset) else repr(float(onset)),
                    repr(float(self.death_age[i])),
                ])

    @classmethod
    def from_csv(cls, path) -> "Population":
        births, onsets, deaths = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                births.append(float(row["birth_time"]))
                onsets.append(float(row["onset_age"]) if row["onset_age"] else math.nan)
                deaths.append(float(row["death_age"]))
        return cls(
            birth_time=np.asarray(births),
            onset_age=np.asarray(onsets),
            death_age=np.asarray(deaths),
        )


def _path_uniforms(key: int, lo: int, hi: int) -> tuple[np.ndarray, ...]:
    streams = np.arange(lo, hi, dtype=np.uint64)
    return tuple(
        _kernels.uniforms(key, _kernels.PURPOSE_PATH, streams, slot)
        for slot in (0, 1, 2, 3)
    )


def simulate_subject(rates: RateSet, birth_time: float, seed: int,
                     stream: int = 0, horizon: float = MAX_AGE) -> LifePath:
    """Simulate a single subject on stream ``stream`` of ``seed``.

    Identical to the corresponding subject of :func:`simulate_population`
    (the birth-time deviate of the stream is skipped, not reused).
    """
    key = _kernels.derive_key(seed)
    _, u_on, u_dh, u_dd = _path_uniforms(key, stream, stream + 1)
    onset, death = _kernels.illness_death_paths(
        u_on, u_dh, u_dd,
        rates.incidence.c0, rates.incidence.c1,
        rates.mortality_healthy.c0, rates.mortality_healthy.c1,
        rates.mortality_diseased.c0, rates.mortality_diseased.c1,
        horizon,
    )
    return LifePath(
        birth_time=float(birth_time),
        onset_age=None if math.isnan(onset[0]) else float(onset[0]),
        death_age=float(death[0]),
    )


def simulate_population(rates: RateSet, n: int,
                        birth_window: tuple[float, float] = DEFAULT_BIRTH_WINDOW,
                        seed: int = 0, workers: int = 1,
                        horizon: float = MAX_AGE) -> Population:
    """Simulate ``n`` subjects with births uniform on ``birth_window``.

    Output is bit-identical for identical (seed, n, rates, birth_window)
    regardless of ``workers``; each subject consumes only its own counter
    stream, so chunk boundaries cannot influence results.
    """
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    t_start, t_end = float(birth_window[0]), float(birth_window[1])
    if not t_start < t_end:
        raise ValueError(f"birth window must satisfy t_start < t_end, got {birth_window}")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    key = _kernels.derive_key(seed)
    coeffs = (
        rates.incidence.c0, rates.incidence.c1,
        rates.mortality_healthy.c0, rates.mortality_healthy.c1,
        rates.mortality_diseased.c0, rates.mortality_diseased.c1,
    )

    def chunk(lo: int, hi: int):
        u_birth, u_on, u_dh, u_dd = _path_uniforms(key, lo, hi)
        births = t_start + (t_end - t_start) * u_birth
        onset, death = _kernels.illness_death_paths(u_on, u_dh, u_dd, *coeffs, horizon)
        return births, onset, death

    bounds = np.linspace(0, n, num=min(workers, n) + 1, dtype=int)
    spans = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if len(spans) == 1:
        parts = [chunk(*spans[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            parts = list(pool.map(lambda s: chunk(*s), spans))

    return Population(
        birth_time=np.concatenate([p[0] for p in parts]),
        onset_age=np.concatenate([p[1] for p in parts]),
        death_age=np.concatenate([p[2] for p in parts]),
        seed=seed,
        rates=rates,
        birth_window=(t_start, t_end),
    )


class EmpiricalMortality:
    """Death rates per age band estimated from a simulated population.

    Rate in band [b, b+w) is deaths / person-years lived in the band; lookups
    interpolate linearly between band midpoints (clamped at the ends). This is
    the "general mortality from the population itself" alternative to
    composing it from the prevalence oracle.
    """

    def __init__(self, pop: Population, band_width: float = 1.0):
        if band_width <= 0.0:
            raise ValueError("band_width must be positive")
        death = pop.death_age
        k = np.floor(death / band_width).astype(np.int64)
        n_bands = int(k.max()) + 1
        counts = np.bincount(k, minlength=n_bands)
        deaths = counts.astype(np.int64)
        # person-years in band b: full width for every subject dying in a later
        # band, plus the fractional tail of subjects dying inside band b
        later = len(pop) - np.cumsum(counts)
        frac = np.zeros(n_bands)
        np.add.at(frac, k, death - k * band_width)
        lived = later * band_width + frac
        ok = lived > 0.0
        self.band_mid = (np.arange(n_bands) + 0.5)[ok] * band_width
        self.mu = deaths[ok] / lived[ok]

    def at(self, age):
        out = np.interp(np.asarray(age, dtype=float), self.band_mid, self.mu)
        return out if np.ndim(age) else float(out)

    __call__ = at

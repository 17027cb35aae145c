"""Estimation of the mortality rate ratio from survey records.

The pipeline has three steps:

(i)   incidence: reconstruct each participant's retrospective condition-free
      exposure [0, age - status*duration) plus the onset event, split it into
      age bands (Lexis expansion), and fit a log-linear Poisson rate model by
      iteratively reweighted least squares;
(ii)  prevalence: per-band fractions of diseased among alive participants,
      smoothed by a cubic smoothing spline whose penalty is chosen by
      generalized cross-validation, giving a robust age-derivative;
(iii) plug-in: combine incidence, prevalence, its derivative, and the known
      general mortality into the rate ratio

          R = 1 + [lam*(1-pi) - dpi] / [pi*(1-pi)*(mu - lam) + pi*dpi].

Step (iii) inverts the prevalence balance equation, so feeding it
self-consistent inputs returns the true ratio exactly; estimation error enters
only through the estimated lambda and pi surfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline, make_smoothing_spline
from scipy.special import xlogy

from .errors import (
    ConvergenceError,
    DegenerateDenominatorError,
    EmptySurveyError,
    EstimationError,
    InvalidQuadrupleError,
    PrevalenceRangeError,
    SeparationError,
)
from .prevalence import PrevalenceOracle
from .rates import RateSet
from .survey import Survey

DEFAULT_AGE_GRID = (65.0, 70.0, 75.0, 80.0, 85.0, 90.0, 95.0)
DEFAULT_BAND_WIDTH = 1.0

SCENARIOS = ("lambda_estimated", "pi_estimated", "both_estimated")

# Below this absolute denominator the plug-in ratio is reported as not
# estimable rather than clamped.
DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class LexisCell:
    """Person-years at risk and onset events in one age band [age_lo, age_hi).

    Note: an onset falling exactly on a band edge contributes its event to the
    right band but its exposure to the left ones, so a cell can in principle
    carry an event with zero person-years; such cells are excluded from the
    regression.
    """

    age_lo: float
    age_hi: float
    person_years: float
    events: int

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.age_lo + self.age_hi)


def lexis_expand(survey: Survey, band_width: float = DEFAULT_BAND_WIDTH) -> list[LexisCell]:
    """Split retrospective condition-free exposure into age bands.

    A status-0 participant of age a contributes a years at risk; a status-1
    participant contributes a - d years at risk and one event in the band
    containing the onset age a - d. Person-time is split exactly across bands.
    """
    if band_width <= 0.0:
        raise ValueError("band_width must be positive")
    if survey.n == 0:
        raise EmptySurveyError("cannot Lexis-expand an empty survey")
    age = np.asarray(survey.age, dtype=float)
    dur = np.asarray(survey.duration, dtype=float)
    delta = np.asarray(survey.delta)
    if np.any(dur > age):
        i = int(np.argmax(dur > age))
        raise InvalidQuadrupleError(
            f"record {i} has duration {dur[i]} exceeding age {age[i]}"
        )
    if np.any(dur < 0.0):
        raise InvalidQuadrupleError("negative duration")

    end = age - np.where(delta == 1, dur, 0.0)  # onset age, or survey age if healthy
    k = np.floor(end / band_width).astype(np.int64)
    n_bands = int(k.max()) + 1

    counts = np.bincount(k, minlength=n_bands)
    # band b gets the full width from every record whose exposure ends in a
    # later band, plus the fractional piece of records ending inside band b
    later = survey.n - np.cumsum(counts)
    frac = np.zeros(n_bands)
    np.add.at(frac, k, end - k * band_width)
    person_years = later * band_width + frac

    events = np.bincount(k[delta == 1], minlength=n_bands)

    return [
        LexisCell(
            age_lo=b * band_width,
            age_hi=(b + 1) * band_width,
            person_years=float(person_years[b]),
            events=int(events[b]),
        )
        for b in range(n_bands)
        if person_years[b] > 0.0 or events[b] > 0
    ]


@dataclass(frozen=True)
class IncidenceFit:
    """Log-linear Poisson fit: events ~ person_years * exp(beta0 + beta1*age)."""

    beta0: float
    beta1: float
    se0: float
    se1: float
    converged: bool
    n_iter: int
    deviance: float

    def rate_at(self, age):
        out = np.exp(self.beta0 + self.beta1 * np.asarray(age, dtype=float))
        return out if np.ndim(age) else float(out)


def fit_poisson_loglinear(cells: list[LexisCell], max_iter: int = 50,
                          tol: float = 1e-10) -> IncidenceFit:
    """IRLS fit of the two-parameter log-linear Poisson rate model.

    Uses band midpoints as the age covariate and log person-years as offset;
    zero-exposure cells are skipped. Convergence is a relative deviance change
    below ``tol``; standard errors come from the inverse information at the
    optimum.
    """
    used = [c for c in cells if c.person_years > 0.0]
    if len(used) < 2:
        raise EstimationError("need at least 2 cells with positive person-years")
    y = np.array([c.events for c in used], dtype=float)
    py = np.array([c.person_years for c in used])
    a = np.array([c.midpoint for c in used])
    if y.sum() < 1:
        raise EstimationError("need at least one event to fit an incidence rate")
    if np.count_nonzero(y) == 1:
        raise SeparationError("all events fall in a single cell; slope not identifiable")

    X = np.column_stack([np.ones_like(a), a])
    offset = np.log(py)
    beta = np.array([math.log(y.sum() / py.sum()), 0.0])

    def deviance(mu: np.ndarray) -> float:
        return 2.0 * float(np.sum(xlogy(y, y / np.where(mu > 0, mu, 1.0)) - (y - mu)))

    dev = math.inf
    info = None
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        eta = offset + X @ beta
        mu = np.exp(eta)
        if not np.all(np.isfinite(mu)):
            raise ConvergenceError("Poisson IRLS diverged (non-finite fitted means)")
        info = (X * mu[:, None]).T @ X
        score = X.T @ (y - mu)
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular information matrix: {exc}") from exc
        beta = beta + step
        new_dev = deviance(np.exp(offset + X @ beta))
        if abs(dev - new_dev) < tol * (abs(new_dev) + 1e-10):
            dev = new_dev
            converged = True
            break
        dev = new_dev

    cov = np.linalg.inv(info)
    return IncidenceFit(
        beta0=float(beta[0]),
        beta1=float(beta[1]),
        se0=float(math.sqrt(cov[0, 0])),
        se1=float(math.sqrt(cov[1, 1])),
        converged=converged,
        n_iter=n_iter,
        deviance=float(dev),
    )


@dataclass(frozen=True)
class SplineControl:
    """Smoothing controls for the prevalence curve.

    ``lam`` is the roughness penalty; None selects it by generalized
    cross-validation. Bands with fewer than ``min_band_count`` alive
    participants are flagged low-information and excluded from the fit.
    """

    lam: float | None = None
    min_band_count: int = 50


@dataclass(frozen=True)
class PrevalenceCurve:
    """Per-band prevalence estimates with a cubic smoothing-spline fit."""

    band_centers: np.ndarray
    band_estimates: np.ndarray
    alive_counts: np.ndarray
    included: np.ndarray
    spline: BSpline = field(repr=False)
    dspline: BSpline = field(repr=False)

    @property
    def fit_range(self) -> tuple[float, float]:
        inc = self.band_centers[self.included]
        return float(inc[0]), float(inc[-1])

    def pi_at(self, age):
        out = self.spline(np.asarray(age, dtype=float))
        return out if np.ndim(age) else float(out)

    def dpi_at(self, age):
        out = self.dspline(np.asarray(age, dtype=float))
        return out if np.ndim(age) else float(out)


def estimate_prevalence(survey: Survey, band_width: float = DEFAULT_BAND_WIDTH,
                        smoothing: SplineControl | None = None) -> PrevalenceCurve:
    """Per-age-band prevalence with a smoothing-spline fit and derivative.

    Band estimate = (# status 1) / (# alive) among participants in the band;
    empty bands are omitted. The spline is evaluable (and differentiable)
    anywhere, but outside the fitted band range it extrapolates cubically.
    """
    if band_width <= 0.0:
        raise ValueError("band_width must be positive")
    if survey.n == 0:
        raise EmptySurveyError("cannot estimate prevalence from an empty survey")
    smoothing = smoothing or SplineControl()

    k = np.floor(np.asarray(survey.age, dtype=float) / band_width).astype(np.int64)
    n_bands = int(k.max()) + 1
    alive = np.bincount(k, minlength=n_bands)
    diseased = np.bincount(k[np.asarray(survey.delta) == 1], minlength=n_bands)

    occupied = alive > 0
    centers = (np.arange(n_bands) + 0.5)[occupied] * band_width
    alive = alive[occupied]
    diseased = diseased[occupied]
    estimates = diseased / alive
    included = alive >= smoothing.min_band_count

    if included.sum() < 5:
        raise EstimationError(
            f"only {int(included.sum())} usable bands "
            f"(>= {smoothing.min_band_count} alive); need at least 5 for the spline"
        )
    spline = make_smoothing_spline(centers[included], estimates[included],
                                   lam=smoothing.lam)
    return PrevalenceCurve(
        band_centers=centers,
        band_estimates=estimates,
        alive_counts=alive,
        included=included,
        spline=spline,
        dspline=spline.derivative(),
    )


def mrr_plugin(lambda_at, pi_at, dpi_at, mu_at, age: float) -> float:
    """Plug-in mortality rate ratio at one age.

    All four inputs are callables age -> value. Raises PrevalenceRangeError
    when pi(age) is outside (0, 1) and DegenerateDenominatorError when the
    denominator is smaller than DENOMINATOR_FLOOR in absolute value (the age
    is reported as not estimable, never clamped).
    """
    lam = float(lambda_at(age))
    pi = float(pi_at(age))
    dpi = float(dpi_at(age))
    mu = float(mu_at(age))
    if not 0.0 < pi < 1.0:
        raise PrevalenceRangeError(f"prevalence {pi:.6g} at age {age:g} outside (0, 1)")
    numerator = lam * (1.0 - pi) - dpi
    denominator = pi * (1.0 - pi) * (mu - lam) + pi * dpi
    if abs(denominator) < DENOMINATOR_FLOOR:
        raise DegenerateDenominatorError(
            f"denominator {denominator:.3g} at age {age:g} below {DENOMINATOR_FLOOR:g}"
        )
    return 1.0 + numerator / denominator


@dataclass(frozen=True)
class MrrTable:
    """Estimated rate ratio per age for one estimation scenario.

    ``r_hat`` is NaN at ages flagged not estimable; ``notes`` records why.
    ``incidence_fit`` / ``prevalence_curve`` are present when the scenario
    estimated that ingredient.
    """

    scenario: str
    ages: np.ndarray
    r_hat: np.ndarray
    notes: tuple
    incidence_fit: IncidenceFit | None = None
    prevalence_curve: PrevalenceCurve | None = None


def estimate_rate_ratio(survey: Survey, mu_at, scenario: str,
                   oracle: PrevalenceOracle | None = None,
                   true_rates: RateSet | None = None,
                   ages=DEFAULT_AGE_GRID,
                   band_width: float = DEFAULT_BAND_WIDTH,
                   smoothing: SplineControl | None = None) -> MrrTable:
    """Estimate the rate ratio on an age grid under one scenario.

    Scenarios: ``lambda_estimated`` (incidence from the survey, prevalence
    from ``oracle``), ``pi_estimated`` (prevalence from the survey, incidence
    from ``true_rates``), ``both_estimated``. The general mortality ``mu_at``
    is always supplied externally (it is assumed known).
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")

    if scenario in ("lambda_estimated", "both_estimated"):
        fit = fit_poisson_loglinear(lexis_expand(survey, band_width))
        if not fit.converged:
            raise ConvergenceError("incidence regression did not converge")
        lambda_at = fit.rate_at
    else:
        if true_rates is None:
            raise ValueError("scenario pi_estimated requires true_rates")
        fit = None
        lambda_at = true_rates.incidence.at

    if scenario in ("pi_estimated", "both_estimated"):
        curve = estimate_prevalence(survey, band_width, smoothing)
        pi_at, dpi_at = curve.pi_at, curve.dpi_at
    else:
        if oracle is None:
            raise ValueError("scenario lambda_estimated requires a prevalence oracle")
        curve = None
        pi_at, dpi_at = oracle.pi_at, oracle.dpi_at

    ages = np.asarray(ages, dtype=float)
    r_hat = np.empty(ages.shape)
    notes: list[str | None] = []
    for i, a in enumerate(ages):
        try:
            r_hat[i] = mrr_plugin(lambda_at, pi_at, dpi_at, mu_at, float(a))
            notes.append(None)
        except (DegenerateDenominatorError, PrevalenceRangeError) as exc:
            r_hat[i] = np.nan
            notes.append(str(exc))

    return MrrTable(
        scenario=scenario,
        ages=ages,
        r_hat=r_hat,
        notes=tuple(notes),
        incidence_fit=fit,
        prevalence_curve=curve,
    )

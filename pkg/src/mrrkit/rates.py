"""Parametric transition rates of the illness-death model.

The model has three states (healthy, diseased, dead) and three transitions:
incidence (healthy -> diseased), mortality of the healthy (healthy -> dead)
and mortality of the diseased (diseased -> dead). Each rate is log-linear in
age, ``exp(c0 + c1 * age)``, which keeps the mortality rate ratio itself
log-linear: ``mrr(a) = exp((c0_1 - c0_0) + (c1_1 - c1_0) * a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Rates are only evaluated on [0, MAX_AGE]; survival beyond MAX_AGE under the
# default mortality is negligible (< 1e-10).
MAX_AGE = 110.0


@dataclass(frozen=True)
class GompertzRate:
    """Hazard of the form ``exp(c0 + c1 * age)`` (units 1/year).

    c0 is the dimensionless log-level, c1 the per-year log-slope. The rate is
    strictly positive for finite age and monotone increasing iff c1 > 0.
    """

    c0: float
    c1: float

    def at(self, age):
        """Evaluate the hazard at ``age`` (scalar or array)."""
        if np.ndim(age) == 0:
            return math.exp(self.c0 + self.c1 * float(age))
        age = np.asarray(age, dtype=float)
        return np.exp(self.c0 + self.c1 * age)

    __call__ = at

    def cumulative(self, age, start: float = 0.0):
        """Integrated hazard over [start, age].

        Closed form: ``(exp(c0)/c1) * (exp(c1*age) - exp(c1*start))`` with the
        c1 = 0 limit ``exp(c0) * (age - start)``.
        """
        age = np.asarray(age, dtype=float)
        if self.c1 == 0.0:
            out = math.exp(self.c0) * (age - start)
        else:
            out = (math.exp(self.c0) / self.c1) * (
                np.exp(self.c1 * age) - math.exp(self.c1 * start)
            )
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class RateSet:
    """The three transition rates of the illness-death model."""

    incidence: GompertzRate
    mortality_healthy: GompertzRate
    mortality_diseased: GompertzRate

    def mrr(self, age):
        """True mortality rate ratio ``mortality_diseased / mortality_healthy``."""
        d0 = self.mortality_diseased.c0 - self.mortality_healthy.c0
        d1 = self.mortality_diseased.c1 - self.mortality_healthy.c1
        if np.ndim(age) == 0:
            return math.exp(d0 + d1 * float(age))
        return np.exp(d0 + d1 * np.asarray(age, dtype=float))

    def general_mortality(self, age, prevalence):
        """Population mortality ``pi * mu1 + (1 - pi) * mu0`` at ``age``.

        ``prevalence`` must lie in [0, 1]; the result always lies between the
        two state-specific rates.
        """
        p = np.asarray(prevalence, dtype=float)
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError(f"prevalence must be in [0, 1], got {prevalence!r}")
        out = p * self.mortality_diseased.at(age) + (1.0 - p) * self.mortality_healthy.at(age)
        return out if np.ndim(out) else float(out)


def true_mrr(rates: RateSet, age):
    """Module-level alias for :meth:`RateSet.mrr`."""
    return rates.mrr(age)


def general_mortality(rates: RateSet, age, prevalence):
    """Module-level alias for :meth:`RateSet.general_mortality`."""
    return rates.general_mortality(age, prevalence)


# Long-term-care motivated defaults: incidence and the two mortality rates of
# an elderly population where the diseased state is "in need of care". With
# these values the true rate ratio is exp(1.5 - 0.015 * age), strictly
# decreasing and crossing 1.0 at age 100.
DEFAULT_RATES = RateSet(
    incidence=GompertzRate(-9.5, 0.085),
    mortality_healthy=GompertzRate(-11.0, 0.11),
    mortality_diseased=GompertzRate(-9.5, 0.095),
)

"""mrrkit: illness-death cohort simulation and mortality rate ratio estimation.

Simulates populations through a three-state illness-death model with Gompertz
transition rates, mimics cross-sectional surveys recording (time, age, status,
duration), and estimates the age-specific mortality rate ratio of diseased vs
healthy subjects from those records plus known general mortality.
"""

from . import errors
from ._kernels import BACKEND as kernel_backend
from .cohort import (
    DEFAULT_BIRTH_WINDOW,
    EmpiricalMortality,
    LifePath,
    Population,
    sample_gompertz_event_age,
    simulate_population,
    simulate_subject,
)
from .estimate import (
    DEFAULT_AGE_GRID,
    IncidenceFit,
    LexisCell,
    MrrTable,
    PrevalenceCurve,
    SplineControl,
    estimate_prevalence,
    fit_poisson_loglinear,
    lexis_expand,
    mrr_plugin,
    estimate_rate_ratio,
)
from .experiment import (
    ExperimentConfig,
    MortalityTable,
    RunReport,
    run_replication,
)
from .prevalence import PrevalenceOracle, solve_prevalence
from .rates import DEFAULT_RATES, MAX_AGE, GompertzRate, RateSet, general_mortality, true_mrr
from .survey import DEFAULT_SURVEY_WINDOW, Quadruple, Survey, draw_survey
from .version import __version__

__all__ = [
    "BACKEND",
    "DEFAULT_AGE_GRID",
    "DEFAULT_BIRTH_WINDOW",
    "DEFAULT_RATES",
    "DEFAULT_SURVEY_WINDOW",
    "EmpiricalMortality",
    "ExperimentConfig",
    "GompertzRate",
    "IncidenceFit",
    "LexisCell",
    "LifePath",
    "MAX_AGE",
    "MortalityTable",
    "MrrTable",
    "Population",
    "PrevalenceCurve",
    "PrevalenceOracle",
    "Quadruple",
    "RateSet",
    "RunReport",
    "SplineControl",
    "Survey",
    "__version__",
    "draw_survey",
    "errors",
    "estimate_prevalence",
    "fit_poisson_loglinear",
    "general_mortality",
    "kernel_backend",
    "lexis_expand",
    "mrr_plugin",
    "estimate_rate_ratio",
    "sample_gompertz_event_age",
    "simulate_population",
    "simulate_subject",
    "solve_prevalence",
    "true_mrr",
]

"""Shared fixtures: default-config populations, surveys and estimates.

The heavy objects (500k-subject populations, 200k-record surveys, fitted
estimators) are computed lazily once per session and shared by the module,
replication and acceptance tests, exactly as the replication pipeline would
produce them (same seed derivation).
"""

from __future__ import annotations

import pytest

import mrrkit as mk
from mrrkit._kernels import derive_seed


class ReplicaCache:
    """Memoized default-configuration replication objects."""

    def __init__(self):
        self.config = mk.ExperimentConfig()
        self.oracle = mk.solve_prevalence(self.config.rates)
        self._pops = {}
        self._surveys = {}
        self._fits = {}
        self._tables = {}

    @property
    def rates(self):
        return self.config.rates

    @property
    def seeds(self):
        return self.config.seeds

    def population(self, seed: int) -> mk.Population:
        if seed not in self._pops:
            self._pops[seed] = mk.simulate_population(
                self.rates, self.config.population_size,
                self.config.birth_window, seed=seed,
            )
        return self._pops[seed]

    def survey(self, seed: int, n: int) -> mk.Survey:
        key = (seed, n)
        if key not in self._surveys:
            self._surveys[key] = mk.draw_survey(
                self.population(seed), n, self.config.survey_window,
                seed=derive_seed(seed, n),
            )
        return self._surveys[key]

    def fit(self, seed: int, n: int) -> mk.IncidenceFit:
        key = (seed, n)
        if key not in self._fits:
            self._fits[key] = mk.fit_poisson_loglinear(
                mk.lexis_expand(self.survey(seed, n), self.config.band_width)
            )
        return self._fits[key]

    def table(self, seed: int, n: int, scenario: str) -> mk.MrrTable:
        key = (seed, n, scenario)
        if key not in self._tables:
            self._tables[key] = mk.estimate_rate_ratio(
                self.survey(seed, n), self.oracle.general_mortality_at, scenario,
                oracle=self.oracle, true_rates=self.rates,
                ages=self.config.age_grid, band_width=self.config.band_width,
                smoothing=self.config.spline,
            )
        return self._tables[key]


@pytest.fixture(scope="session")
def replica() -> ReplicaCache:
    return ReplicaCache()


@pytest.fixture(scope="session")
def rates():
    return mk.DEFAULT_RATES


@pytest.fixture(scope="session")
def oracle(replica):
    return replica.oracle


@pytest.fixture(scope="session")
def small_config():
    """A fast configuration for pipeline/CLI/determinism tests."""
    return mk.ExperimentConfig(
        population_size=20_000,
        sample_sizes=(1000, 2000),
        seeds=(1, 2),
        age_grid=(70.0, 80.0),
        spline=mk.SplineControl(min_band_count=5),
    )


# Acceptance reporting: each criterion prints one pass/fail line and the
# collected lines are echoed again in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, passed: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

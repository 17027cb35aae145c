"""Cohort simulator: sampling correctness, path invariants, determinism."""

import math

import numpy as np
import pytest

import mrrkit as mk
from mrrkit import GompertzRate, RateSet, sample_gompertz_event_age
from mrrkit.cohort import EmpiricalMortality, LifePath, Population


def constant_rate(value: float) -> GompertzRate:
    return GompertzRate(math.log(value), 0.0)


class TestEventAgeSampler:
    def test_u_one_gives_start_age(self, rates):
        assert sample_gompertz_event_age(rates.incidence, 40.0, 1.0) == 40.0

    def test_constant_rate_limit(self):
        # rate 0.1/yr, u = exp(-1): exactly ten years after start
        got = sample_gompertz_event_age(constant_rate(0.1), 25.0, math.exp(-1.0))
        assert got == pytest.approx(35.0, rel=1e-12)

    def test_rejects_bad_inputs(self, rates):
        with pytest.raises(ValueError):
            sample_gompertz_event_age(rates.incidence, 40.0, 0.0)
        with pytest.raises(ValueError):
            sample_gompertz_event_age(rates.incidence, 40.0, 1.5)
        with pytest.raises(ValueError):
            sample_gompertz_event_age(rates.incidence, -1.0, 0.5)

    def test_monotone_in_u(self, rates):
        ages = [sample_gompertz_event_age(rates.mortality_healthy, 0.0, u)
                for u in (0.9, 0.5, 0.1, 0.001)]
        assert ages == sorted(ages)

    def test_empirical_survival_matches_closed_form(self, rates):
        # Kolmogorov-Smirnov style check of 1e6 inverse-transform draws
        from mrrkit import _kernels

        n = 1_000_000
        key = _kernels.derive_key(77)
        u = _kernels.uniforms(key, 1, np.arange(n, dtype=np.uint64), 9)
        mu0 = rates.mortality_healthy
        ages = np.sort(_kernels.event_ages(np.zeros(n), u, mu0.c0, mu0.c1))
        cdf = 1.0 - np.exp(-mu0.cumulative(ages, start=0.0))
        i = np.arange(n)
        ks = max(np.abs(cdf - i / n).max(), np.abs(cdf - (i + 1) / n).max())
        assert ks < 0.002


class TestLifePath:
    def test_validation(self):
        with pytest.raises(ValueError):
            LifePath(birth_time=1900.0, onset_age=None, death_age=0.0)
        with pytest.raises(ValueError):
            LifePath(birth_time=1900.0, onset_age=80.0, death_age=70.0)
        p = LifePath(birth_time=1900.0, onset_age=70.0, death_age=80.0)
        assert p.death_time == 1980.0
        assert p.alive_at(1975.0) and not p.alive_at(1980.0)
        assert p.diseased_at_age(75.0) and not p.diseased_at_age(69.0)


class TestSimulateSubject:
    def test_zero_incidence_never_diseased(self, rates):
        r = RateSet(GompertzRate(-1000.0, 0.085), rates.mortality_healthy,
                    rates.mortality_diseased)
        for stream in range(200):
            path = mk.simulate_subject(r, 1900.0, seed=4, stream=stream)
            assert path.onset_age is None

    def test_overwhelming_mortality_dies_immediately(self, rates):
        r = RateSet(rates.incidence, GompertzRate(10.0, 0.0), rates.mortality_diseased)
        for stream in range(200):
            path = mk.simulate_subject(r, 1900.0, seed=4, stream=stream)
            assert path.onset_age is None
            assert path.death_age < 0.01

    def test_matches_population_subject(self, rates):
        pop = mk.simulate_population(rates, 500, seed=11)
        for i in (0, 123, 499):
            path = mk.simulate_subject(rates, float(pop.birth_time[i]), seed=11, stream=i)
            assert path.death_age == pop.death_age[i]
            onset = pop.onset_age[i]
            assert (path.onset_age is None) == math.isnan(onset)
            if path.onset_age is not None:
                assert path.onset_age == onset


class TestSimulatePopulation:
    def test_size_one(self, rates):
        pop = mk.simulate_population(rates, 1, seed=0)
        assert len(pop) == 1

    def test_rejects_bad_arguments(self, rates):
        with pytest.raises(ValueError):
            mk.simulate_population(rates, 0, seed=0)
        with pytest.raises(ValueError):
            mk.simulate_population(rates, 10, birth_window=(1950.0, 1900.0), seed=0)
        with pytest.raises(ValueError):
            mk.simulate_population(rates, 10, seed=0, workers=0)

    def test_path_invariants(self, replica):
        pop = replica.population(1)
        assert np.all(pop.death_age > 0.0)
        assert np.all(pop.death_age <= mk.MAX_AGE)
        has = ~np.isnan(pop.onset_age)
        assert np.all(pop.onset_age[has] > 0.0)
        assert np.all(pop.onset_age[has] < pop.death_age[has])
        lo, hi = pop.birth_window
        assert np.all((pop.birth_time > lo) & (pop.birth_time <= hi))

    def test_deterministic_same_seed(self, rates):
        a = mk.simulate_population(rates, 5_000, seed=9)
        b = mk.simulate_population(rates, 5_000, seed=9)
        assert a.digest() == b.digest()
        assert a.digest() != mk.simulate_population(rates, 5_000, seed=10).digest()

    def test_worker_count_invariance(self, rates):
        digests = {mk.simulate_population(rates, 10_000, seed=3, workers=w).digest()
                   for w in (1, 2, 5)}
        assert len(digests) == 1

    def test_competing_risk_fraction(self):
        # constant rates: P(onset before death) = lam / (lam + mu0)
        r = RateSet(constant_rate(0.02), constant_rate(0.03), constant_rate(0.03))
        pop = mk.simulate_population(r, 1_000_000, seed=12, horizon=math.inf)
        frac = float(np.mean(~np.isnan(pop.onset_age)))
        p = 0.02 / 0.05
        se = math.sqrt(p * (1 - p) / 1_000_000)
        assert abs(frac - p) < 3.0 * se

    def test_ever_diseased_among_survivors_matches_oracle(self, replica, oracle):
        pop = replica.population(1)
        assert abs(pop.prevalence_at_age(80.0) - oracle.pi_at(80.0)) < 0.01

    def test_prevalence_tracks_oracle_everywhere(self, replica, oracle):
        pop = replica.population(1)
        mids = np.arange(50.5, 95.0, 1.0)
        dev = np.abs(pop.prevalence_at_age(mids) - oracle.pi_at(mids))
        assert np.nanmax(dev) < 0.02

    def test_csv_round_trip(self, rates, tmp_path):
        pop = mk.simulate_population(rates, 300, seed=2)
        path = tmp_path / "pop.csv"
        pop.to_csv(path)
        back = Population.from_csv(path)
        assert np.array_equal(back.birth_time, pop.birth_time)
        assert np.array_equal(back.onset_age, pop.onset_age, equal_nan=True)
        assert np.array_equal(back.death_age, pop.death_age)

    def test_getitem_and_iteration(self, rates):
        pop = mk.simulate_population(rates, 50, seed=5)
        paths = list(pop.paths)
        assert len(paths) == 50
        assert all(isinstance(p, LifePath) for p in paths)


class TestEmpiricalMortality:
    def test_tracks_composed_mortality(self, replica, oracle):
        emp = EmpiricalMortality(replica.population(1))
        for age in (60.0, 70.0, 80.0, 90.0):
            expected = oracle.general_mortality_at(age)
            assert emp.at(age) == pytest.approx(expected, rel=0.1)

    def test_rejects_bad_band_width(self, replica):
        with pytest.raises(ValueError):
            EmpiricalMortality(replica.population(1), band_width=0.0)

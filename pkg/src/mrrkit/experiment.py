"""Experiment orchestration: config, replication pipeline, CSV outputs.

A replication run simulates one population per seed, draws one survey per
(sample size, seed), runs the three estimation scenarios on each survey, and
writes machine-checkable CSV tables (coefficient table, rate-ratio table,
prevalence curves) plus figure-data files. Identical config and seeds give
byte-identical outputs, independent of worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .cohort import (
    DEFAULT_BIRTH_WINDOW,
    EmpiricalMortality,
    simulate_population,
)
from .errors import ConfigError
from .estimate import (
    DEFAULT_AGE_GRID,
    DEFAULT_BAND_WIDTH,
    SCENARIOS,
    SplineControl,
    estimate_rate_ratio,
)
from .prevalence import PrevalenceOracle, solve_prevalence
from .rates import DEFAULT_RATES, MAX_AGE, GompertzRate, RateSet
from .survey import DEFAULT_SURVEY_WINDOW, draw_survey
from .version import __version__

DEFAULT_SAMPLE_SIZES = (5000, 10000, 20000, 50000, 100000, 200000)
DEFAULT_SEEDS = (1, 2, 3, 4, 5)

_MU_SOURCES = ("oracle", "empirical")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a replication run depends on."""

    rates: RateSet = DEFAULT_RATES
    population_size: int = 500_000
    birth_window: tuple[float, float] = DEFAULT_BIRTH_WINDOW
    survey_window: tuple[float, float] = DEFAULT_SURVEY_WINDOW
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    band_width: float = DEFAULT_BAND_WIDTH
    spline: SplineControl = field(default_factory=SplineControl)
    age_grid: tuple[float, ...] = DEFAULT_AGE_GRID
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    oracle_step: float = 0.01
    max_age: float = MAX_AGE
    mu_source: str = "oracle"
    workers: int = 1
    output_dir: str | None = None

    def validate(self) -> None:
        if self.population_size < 1:
            raise ConfigError(f"population_size must be >= 1, got {self.population_size}")
        for name in ("birth_window", "survey_window"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError(f"{name} must be ordered (lo < hi), got {(lo, hi)}")
        if not self.sample_sizes or any(n < 1 for n in self.sample_sizes):
            raise ConfigError("sample_sizes must be a nonempty list of positive ints")
        if self.band_width <= 0:
            raise ConfigError("band_width must be positive")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if self.oracle_step <= 0:
            raise ConfigError("oracle_step must be positive")
        if not 0 < self.max_age <= MAX_AGE:
            raise ConfigError(f"max_age must be in (0, {MAX_AGE}]")
        if any(not 0 <= a <= self.max_age for a in self.age_grid) or not self.age_grid:
            raise ConfigError("age_grid ages must lie in [0, max_age]")
        if self.mu_source not in _MU_SOURCES:
            raise ConfigError(f"mu_source must be one of {_MU_SOURCES}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.spline.min_band_count < 0:
            raise ConfigError("min_band_count must be >= 0")
        if self.spline.lam is not None and self.spline.lam < 0:
            raise ConfigError("spline lam must be >= 0 (or null for GCV)")

    def to_dict(self) -> dict:
        def rate(r: GompertzRate) -> dict:
            return {"c0": r.c0, "c1": r.c1}

        return {
            "rates": {
                "incidence": rate(self.rates.incidence),
                "mortality_healthy": rate(self.rates.mortality_healthy),
                "mortality_diseased": rate(self.rates.mortality_diseased),
            },
            "population_size": self.population_size,
            "birth_window": list(self.birth_window),
            "survey_window": list(self.survey_window),
            "sample_sizes": list(self.sample_sizes),
            "band_width": self.band_width,
            "spline": {"lam": self.spline.lam,
                       "min_band_count": self.spline.min_band_count},
            "age_grid": list(self.age_grid),
            "seeds": list(self.seeds),
            "oracle_step": self.oracle_step,
            "max_age": self.max_age,
            "mu_source": self.mu_source,
            "workers": self.workers,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        def pick(d: dict, allowed: set[str], where: str) -> None:
            unknown = set(d) - allowed
            if unknown:
                raise ConfigError(f"unknown {where} key(s): {sorted(unknown)}")

        pick(data, {f for f in cls.__dataclass_fields__}, "config")
        kwargs = dict(data)
        if "rates" in kwargs:
            rd = kwargs["rates"]
            pick(rd, {"incidence", "mortality_healthy", "mortality_diseased"}, "rates")
            rates = {}
            for name, spec in rd.items():
                pick(spec, {"c0", "c1"}, f"rates.{name}")
                rates[name] = GompertzRate(float(spec["c0"]), float(spec["c1"]))
            kwargs["rates"] = replace(DEFAULT_RATES, **rates)
        if "spline" in kwargs:
            sd = kwargs["spline"]
            pick(sd, {"lam", "min_band_count"}, "spline")
            kwargs["spline"] = SplineControl(
                lam=None if sd.get("lam") is None else float(sd["lam"]),
                min_band_count=int(sd.get("min_band_count", 50)),
            )
        for name in ("birth_window", "survey_window"):
            if name in kwargs:
                kwargs[name] = tuple(float(v) for v in kwargs[name])
        for name, conv in (("sample_sizes", int), ("seeds", int), ("age_grid", float)):
            if name in kwargs:
                kwargs[name] = tuple(conv(v) for v in kwargs[name])
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)

    def config_hash(self) -> str:
        # workers and output_dir are execution knobs that cannot influence
        # results (worker invariance is tested), so they stay out of the hash
        d = self.to_dict()
        d.pop("workers")
        d.pop("output_dir")
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


class MortalityTable:
    """External general-mortality table: (age, mu) rows, linear interpolation."""

    def __init__(self, ages: np.ndarray, mu: np.ndarray):
        order = np.argsort(ages)
        self.ages = np.asarray(ages, dtype=float)[order]
        self.mu = np.asarray(mu, dtype=float)[order]

    @classmethod
    def from_csv(cls, path) -> "MortalityTable":
        ages, mu = [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                ages.append(float(row["age"]))
                mu.append(float(row["mu"]))
        return cls(np.asarray(ages), np.asarray(mu))

    def at(self, age):
        out = np.interp(np.asarray(age, dtype=float), self.ages, self.mu)
        return out if np.ndim(age) else float(out)

    __call__ = at


@dataclass(frozen=True)
class SeedResult:
    """Everything computed from one seed's population."""

    seed: int
    population_digest: str
    population_ages: np.ndarray
    population_prevalence: np.ndarray
    tables: dict
    fits: dict
    curves: dict


@dataclass(frozen=True)
class RunReport:
    """In-memory result of a replication run, with provenance."""

    config: ExperimentConfig
    config_hash: str
    version: str
    kernel_backend: str
    oracle: PrevalenceOracle
    seed_results: tuple[SeedResult, ...]
    out_dir: Path | None
    files: tuple[str, ...]


def _median(values) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return float(np.median(finite)) if finite else math.nan


def _fmt(x) -> str:
    if isinstance(x, float):  # includes numpy float scalars
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def run_replication(config: ExperimentConfig, out_dir=None) -> RunReport:
    """Run the full pipeline for every (seed, sample size, scenario) cell.

    Writes table2.csv, table3.csv, prevalence.csv, per-seed tables and the
    figure-data CSVs under ``out_dir`` (falling back to config.output_dir).
    """
    config.validate()
    if out_dir is None:
        out_dir = config.output_dir
    if out_dir is None:
        raise ConfigError("an output directory is required (argument or config)")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    oracle = solve_prevalence(config.rates, config.max_age, config.oracle_step)
    pop_ages = np.arange(0.0, math.floor(config.max_age) + 1.0)

    seed_results = []
    for seed in config.seeds:
        pop = simulate_population(
            config.rates, config.population_size, config.birth_window,
            seed=seed, workers=config.workers,
        )
        if config.mu_source == "oracle":
            mu_at = oracle.general_mortality_at
        else:
            mu_at = EmpiricalMortality(pop, config.band_width).at

        tables, fits, curves = {}, {}, {}
        for n in config.sample_sizes:
            sv = draw_survey(
                pop, n, config.survey_window,
                seed=_kernels.derive_seed(seed, n), workers=config.workers,
            )
            for scenario in SCENARIOS:
                tables[(scenario, n)] = estimate_rate_ratio(
                    sv, mu_at, scenario,
                    oracle=oracle, true_rates=config.rates,
                    ages=config.age_grid, band_width=config.band_width,
                    smoothing=config.spline,
                )
            fits[n] = tables[("both_estimated", n)].incidence_fit
            curves[n] = tables[("both_estimated", n)].prevalence_curve

        seed_results.append(SeedResult(
            seed=seed,
            population_digest=pop.digest(),
            population_ages=pop_ages,
            population_prevalence=pop.prevalence_at_age(pop_ages),
            tables=tables,
            fits=fits,
            curves=curves,
        ))

    report = RunReport(
        config=config,
        config_hash=config.config_hash(),
        version=__version__,
        kernel_backend=_kernels.BACKEND,
        oracle=oracle,
        seed_results=tuple(seed_results),
        out_dir=out_dir,
        files=(),
    )
    files = _write_report_files(report)
    return replace(report, files=tuple(files))


def _table2_rows(config: ExperimentConfig, fits_per_seed: list[dict]) -> list[list]:
    rows = []
    for n in config.sample_sizes:
        fs = [fits[n] for fits in fits_per_seed]
        rows.append([
            n,
            _median([f.beta0 for f in fs]),
            _median([f.se0 for f in fs]),
            _median([f.beta1 for f in fs]),
            _median([f.se1 for f in fs]),
        ])
    return rows


def _table3_rows(config: ExperimentConfig, tables_per_seed: list[dict]) -> list[list]:
    rows = []
    for scenario in SCENARIOS:
        for i, age in enumerate(config.age_grid):
            for n in config.sample_sizes:
                r_hats = [t[(scenario, n)].r_hat[i] for t in tables_per_seed]
                rows.append([scenario, age, n, _median(r_hats),
                             config.rates.mrr(age)])
    return rows


def write_figure_data(report: RunReport, out_dir) -> dict[str, Path]:
    """Write the three figure-data CSVs (exact plotted values) and return paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = report.config
    first = report.seed_results[0]
    paths = {}

    p = out_dir / "fig_prevalence_validation.csv"
    rows = []
    for age, emp in zip(first.population_ages, first.population_prevalence):
        rows.append([age, emp, report.oracle.pi_at(age)])
    _write_csv(p, ["age", "pi_empirical", "pi_analytic"], rows)
    paths["prevalence_validation"] = p

    sizes = sorted(config.sample_sizes)
    panel_ns = sorted({sizes[0], sizes[(len(sizes) - 1) // 2], sizes[-1]})
    p = out_dir / "fig_prevalence_fits.csv"
    rows = []
    for n in panel_ns:
        curve = first.curves[n]
        for c, est in zip(curve.band_centers, curve.band_estimates):
            rows.append([n, c, est, curve.pi_at(c), report.oracle.pi_at(c)])
    _write_csv(p, ["n", "age", "pi_estimated", "pi_spline", "pi_true"], rows)
    paths["prevalence_fits"] = p

    endpoint_ns = sorted({sizes[0], sizes[-1]})
    p = out_dir / "fig_rate_ratio.csv"
    rows = []
    for scenario in SCENARIOS:
        for n in endpoint_ns:
            table = first.tables[(scenario, n)]
            for age, r_hat in zip(table.ages, table.r_hat):
                rows.append([scenario, age, n, r_hat, config.rates.mrr(age)])
    _write_csv(p, ["scenario", "age", "n", "r_hat", "r_true"], rows)
    paths["rate_ratio"] = p
    return paths


def _write_report_files(report: RunReport) -> list[str]:
    config = report.config
    out_dir = report.out_dir
    files = []

    def record(path: Path) -> None:
        files.append(str(path.relative_to(out_dir)))

    path = out_dir / "prevalence.csv"
    report.oracle.to_csv(path)
    record(path)

    fits_per_seed = [sr.fits for sr in report.seed_results]
    tables_per_seed = [sr.tables for sr in report.seed_results]

    path = out_dir / "table2.csv"
    _write_csv(path, ["n", "beta0", "se0", "beta1", "se1"],
               _table2_rows(config, fits_per_seed))
    record(path)

    path = out_dir / "table3.csv"
    _write_csv(path, ["scenario", "age", "n", "r_hat", "r_true"],
               _table3_rows(config, tables_per_seed))
    record(path)

    for sr in report.seed_results:
        seed_dir = out_dir / "seeds" / f"seed_{sr.seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        path = seed_dir / "table2.csv"
        _write_csv(path, ["n", "beta0", "se0", "beta1", "se1"],
                   _table2_rows(config, [sr.fits]))
        record(path)
        path = seed_dir / "table3.csv"
        _write_csv(path, ["scenario", "age", "n", "r_hat", "r_true"],
                   _table3_rows(config, [sr.tables]))
        record(path)

    for path in write_figure_data(report, out_dir).values():
        record(path)

    meta = {
        "config": config.to_dict(),
        "config_hash": report.config_hash,
        "version": report.version,
        "kernel_backend": report.kernel_backend,
        "seeds": list(config.seeds),
        "population_digests": {str(sr.seed): sr.population_digest
                               for sr in report.seed_results},
        "files": sorted(files) + ["run_meta.json"],
    }
    with open(out_dir / "run_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append("run_meta.json")
    return files

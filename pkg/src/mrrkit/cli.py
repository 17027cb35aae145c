"""Command-line interface.

Verbs: simulate (population -> CSV), survey (population CSV -> quadruple CSV),
estimate (quadruple CSV -> rate-ratio CSVs), replicate (full pipeline),
plot (figure-data CSVs -> PDFs). Each verb runs standalone on files, so
external cross-sectional data can enter at the estimate stage.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from .cohort import Population, simulate_population
from .errors import MrrkitError
from .estimate import SplineControl, estimate_rate_ratio
from .experiment import ExperimentConfig, MortalityTable, run_replication
from .prevalence import solve_prevalence
from .survey import Survey, draw_survey


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return ExperimentConfig.from_json(path)


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    n = args.n if args.n is not None else config.population_size
    seed = args.seed if args.seed is not None else config.seeds[0]
    window = tuple(args.birth_window) if args.birth_window else config.birth_window
    pop = simulate_population(config.rates, n, window, seed=seed,
                              workers=config.workers)
    pop.to_csv(args.out)
    print(f"simulated {len(pop)} subjects (seed {seed}) -> {args.out}")
    print(f"population digest: {pop.digest()}")
    return 0


def _cmd_survey(args) -> int:
    config = _load_config(args.config)
    pop = Population.from_csv(args.population)
    window = tuple(args.window) if args.window else config.survey_window
    seed = args.seed if args.seed is not None else config.seeds[0]
    sv = draw_survey(pop, args.n, window, seed=seed, workers=config.workers)
    sv.to_csv(args.out)
    n_dis = int(sv.delta.sum())
    print(f"surveyed {sv.n} records ({n_dis} with condition) -> {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    config = _load_config(args.config)
    if args.band_width is not None:
        config = replace(config, band_width=args.band_width)
    smoothing = config.spline
    if args.lam is not None or args.min_band_count is not None:
        smoothing = SplineControl(
            lam=args.lam if args.lam is not None else smoothing.lam,
            min_band_count=(args.min_band_count
                            if args.min_band_count is not None
                            else smoothing.min_band_count),
        )
    ages = tuple(args.ages) if args.ages else config.age_grid

    sv = Survey.from_csv(args.quadruples)
    oracle = solve_prevalence(config.rates, config.max_age, config.oracle_step)
    if args.mortality:
        mu_at = MortalityTable.from_csv(args.mortality).at
    else:
        mu_at = oracle.general_mortality_at

    table = estimate_rate_ratio(sv, mu_at, args.scenario, oracle=oracle,
                           true_rates=config.rates, ages=ages,
                           band_width=config.band_width, smoothing=smoothing)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    # r_true is only meaningful when the user supplied the generating rates
    know_truth = args.config is not None
    with open(out / "mrr.csv", "w", newline="") as fh:
        fh.write("scenario,age,n,r_hat,r_true\n")
        for age, r_hat in zip(table.ages, table.r_hat):
            r_true = config.rates.mrr(float(age)) if know_truth else math.nan
            fh.write(f"{args.scenario},{float(age)!r},{sv.n},{float(r_hat)!r},{r_true!r}\n")
    written = [out / "mrr.csv"]

    if table.incidence_fit is not None:
        f = table.incidence_fit
        with open(out / "incidence_fit.csv", "w", newline="") as fh:
            fh.write("n,beta0,se0,beta1,se1\n")
            fh.write(f"{sv.n},{f.beta0!r},{f.se0!r},{f.beta1!r},{f.se1!r}\n")
        written.append(out / "incidence_fit.csv")

    if table.prevalence_curve is not None:
        c = table.prevalence_curve
        with open(out / "prevalence_fit.csv", "w", newline="") as fh:
            fh.write("age,estimate,alive,included,spline,dspline\n")
            for i, center in enumerate(c.band_centers):
                center = float(center)
                fh.write(f"{center!r},{float(c.band_estimates[i])!r},{int(c.alive_counts[i])},"
                         f"{int(c.included[i])},{c.pi_at(center)!r},{c.dpi_at(center)!r}\n")
        written.append(out / "prevalence_fit.csv")

    for i, note in enumerate(table.notes):
        if note:
            print(f"age {table.ages[i]:g}: not estimable ({note})", file=sys.stderr)
    print("wrote " + ", ".join(str(p) for p in written))
    return 0


def _cmd_replicate(args) -> int:
    config = _load_config(args.config)
    if args.seed:
        config = replace(config, seeds=tuple(args.seed))
    if args.n:
        config = replace(config, sample_sizes=tuple(args.n))
    report = run_replication(config, out_dir=args.out)
    print(f"replication complete: {len(report.seed_results)} seed(s), "
          f"{len(config.sample_sizes)} sample size(s)")
    print(f"config hash: {report.config_hash}")
    print(f"outputs under {report.out_dir}")
    if args.plots:
        from .plots import emit_plots

        for p in emit_plots(report, report.out_dir):
            print(f"figure: {p}")
    return 0


def _cmd_plot(args) -> int:
    from .plots import render_figure_dir

    out = args.out if args.out else args.report
    for p in render_figure_dir(args.report, out):
        print(f"figure: {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrrkit",
        description=("Illness-death cohort simulation and mortality rate ratio "
                     "estimation from cross-sectional status-with-duration data."),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a population, write it as CSV")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--n", type=int, help="population size (overrides config)")
    p.add_argument("--seed", type=int, help="seed (default: first config seed)")
    p.add_argument("--birth-window", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("--out", required=True, help="output population CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("survey", help="draw a cross-sectional survey from a population CSV")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--population", required=True, help="population CSV from 'simulate'")
    p.add_argument("--n", type=int, required=True, help="number of survey records")
    p.add_argument("--seed", type=int, help="seed (default: first config seed)")
    p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("--out", required=True, help="output quadruple CSV (t,a,delta,d)")
    p.set_defaults(func=_cmd_survey)

    p = sub.add_parser("estimate", help="estimate the rate ratio from a quadruple CSV")
    p.add_argument("--quadruples", required=True, help="quadruple CSV (t,a,delta,d)")
    p.add_argument("--scenario", default="both_estimated",
                   choices=("lambda_estimated", "pi_estimated", "both_estimated"))
    p.add_argument("--config", help="config JSON (rates for known quantities)")
    p.add_argument("--mortality", help="external mortality CSV (age,mu); "
                                       "default composes mortality from config rates")
    p.add_argument("--band-width", type=float)
    p.add_argument("--min-band-count", type=int)
    p.add_argument("--lam", type=float, help="spline penalty (default: GCV)")
    p.add_argument("--ages", nargs="+", type=float, help="evaluation ages")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("replicate", help="full replication run (tables + figure data)")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", nargs="+", type=int, help="seeds (override config)")
    p.add_argument("--n", nargs="+", type=int, help="sample sizes (override config)")
    p.add_argument("--plots", action="store_true", help="also render figures")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_replicate)

    p = sub.add_parser("plot", help="render figures from a replication output directory")
    p.add_argument("--report", required=True, help="directory with fig*_*.csv data files")
    p.add_argument("--out", help="figure output directory (default: report dir)")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MrrkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

"""Figure rendering (vector PDF) for replication reports.

Each figure has a sibling CSV holding exactly the plotted values, so every
plot is regenerable from files alone (the ``plot`` CLI verb does just that).
"""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_FILES = ("fig_prevalence_validation.pdf", "fig_prevalence_fits.pdf", "fig_rate_ratio.pdf")


def _render_prevalence_overlay(ages, emp, ana, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ages, ana, color="tab:blue", lw=1.5, label="model prevalence")
    ax.plot(ages, emp, "k.", ms=4, label="empirical prevalence")
    ax.set_xlabel("age (years)")
    ax.set_ylabel("prevalence")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _render_prevalence_fits(panels, path: Path) -> None:
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.6),
                             sharey=True, squeeze=False)
    for ax, (n, age, est, spl, true) in zip(axes[0], panels):
        ax.plot(age, true, color="tab:blue", lw=1.5, label="true")
        ax.plot(age, est, "ko", ms=3.5, label="estimated")
        ax.plot(age, spl, "o", ms=3.5, mfc="none", mec="k", label="spline")
        ax.set_title(f"n = {n}")
        ax.set_xlabel("age (years)")
    axes[0][0].set_ylabel("prevalence")
    axes[0][0].legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _render_mrr(panels, path: Path) -> None:
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.6),
                             sharey=True, squeeze=False)
    for ax, (scenario, series) in zip(axes[0], panels):
        first = True
        for n, ages, r_hat, r_true, filled in series:
            if first:
                ax.plot(ages, r_true, color="tab:blue", lw=1.5, label="true R")
                first = False
            style = dict(ms=5, mec="k", mfc="k" if filled else "none")
            ax.plot(ages, r_hat, "o", ls="none", label=f"n = {n}", **style)
        ax.set_title(scenario)
        ax.set_xlabel("age (years)")
    axes[0][0].set_ylabel("mortality rate ratio")
    axes[0][0].legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def emit_plots(report, out_dir=None) -> list[Path]:
    """Render the three report figures (and their data CSVs) to ``out_dir``.

    Returns the list of figure paths; warns and writes nothing for a report
    with no seed results.
    """
    from .experiment import write_figure_data

    if not report.seed_results:
        warnings.warn("report contains no results; no figures written")
        return []
    out_dir = Path(out_dir) if out_dir is not None else report.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    data_paths = write_figure_data(report, out_dir)
    return render_figure_dir(out_dir, out_dir, data_paths)


def render_figure_dir(data_dir, out_dir, data_paths=None) -> list[Path]:
    """Render figures from the figure-data CSVs in ``data_dir``."""
    data_dir = Path(data_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if data_paths is None:
        data_paths = {
            "prevalence_validation": data_dir / "fig_prevalence_validation.csv",
            "prevalence_fits": data_dir / "fig_prevalence_fits.csv",
            "rate_ratio": data_dir / "fig_rate_ratio.csv",
        }
    for key, p in data_paths.items():
        if not Path(p).exists():
            raise FileNotFoundError(f"missing figure data file: {p}")
    written = []

    rows = _read_csv(data_paths["prevalence_validation"])
    ages = [float(r["age"]) for r in rows]
    emp = [float(r["pi_empirical"]) for r in rows]
    ana = [float(r["pi_analytic"]) for r in rows]
    path = out_dir / "fig_prevalence_validation.pdf"
    _render_prevalence_overlay(ages, emp, ana, path)
    written.append(path)

    rows = _read_csv(data_paths["prevalence_fits"])
    panel_ns = sorted({int(r["n"]) for r in rows})
    panels = []
    for n in panel_ns:
        sub = [r for r in rows if int(r["n"]) == n]
        panels.append((
            n,
            [float(r["age"]) for r in sub],
            [float(r["pi_estimated"]) for r in sub],
            [float(r["pi_spline"]) for r in sub],
            [float(r["pi_true"]) for r in sub],
        ))
    path = out_dir / "fig_prevalence_fits.pdf"
    _render_prevalence_fits(panels, path)
    written.append(path)

    rows = _read_csv(data_paths["rate_ratio"])
    scenarios = list(dict.fromkeys(r["scenario"] for r in rows))
    ns = sorted({int(r["n"]) for r in rows})
    panels = []
    for scenario in scenarios:
        series = []
        for i, n in enumerate(ns):
            sub = [r for r in rows if r["scenario"] == scenario and int(r["n"]) == n]
            series.append((
                n,
                [float(r["age"]) for r in sub],
                [float(r["r_hat"]) for r in sub],
                [float(r["r_true"]) for r in sub],
                i == len(ns) - 1,
            ))
        panels.append((scenario, series))
    path = out_dir / "fig_rate_ratio.pdf"
    _render_mrr(panels, path)
    written.append(path)
    return written


def _read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))

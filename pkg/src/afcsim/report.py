"""Report tables and figures.

Every run emits delimited tables with documented headers; figure rendering is
optional and writes PNGs next to the tables. All tables re-parse under
`read_table`, which the test suite uses as the schema check.

Files for a single operating point:
    metrics.csv          key,value pairs for the whole run
    histogram_input.csv  bin_start_ns,counts  (transparency-window pass)
    histogram_echo.csv   bin_start_ns,counts  (comb-written pass)
    comb_profile.csv     detuning_khz,optical_depth
    tableS3.csv          auto/cross-correlation summary row(s)
    tableS4.csv          echo-based prediction of the input correlation
Sweeps add fig2b.csv (pump axis) or fig3bc.csv (storage-time axis).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .memory import comb_profile, efficiency_vs_storage_time
from .pipeline import RunAnalysis
from .units import PS_PER_NS

TABLE_COLUMNS = {
    "fig2b.csv": ("pump_mw", "g2_input", "g2_input_err", "g2_echo", "g2_echo_err",
                  "visibility_input", "visibility_echo"),
    "fig3bc.csv": ("tau_ns", "efficiency", "efficiency_err", "efficiency_analytic",
                   "efficiency_numeric", "g2_echo", "g2_echo_err",
                   "g2_echo_nofc", "g2_echo_nofc_err"),
    "tableS3.csv": ("pump_mw", "g2_ss", "g2_ss_err", "g2_ss_theory",
                    "g2_ii", "g2_ii_err", "g2_ii_theory",
                    "g2_si", "g2_si_err", "cs_ratio", "cs_ratio_err", "cs_ratio_model"),
    "tableS4.csv": ("pump_mw", "g2_echo", "g2_echo_err", "g2_input_predicted",
                    "g2_input", "g2_input_err", "noise_ratio"),
}


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "nan"
    value = float(value)
    if math.isfinite(value) and abs(value) < 1e15 and value == int(value):
        return str(int(value))
    return repr(value)


def write_table(path, columns, rows) -> None:
    """Delimited table with a header row; rows are sequences matching columns."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row width {len(row)} != {len(columns)} columns")
            writer.writerow([_fmt(v) for v in row])


def read_table(path):
    """Inverse of write_table: (columns, {column: list[float]})."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            columns = tuple(next(reader))
        except StopIteration:
            raise ValueError(f"{path}: empty table") from None
        data: dict[str, list[float]] = {c: [] for c in columns}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise ValueError(f"{path}:{lineno}: expected {len(columns)} fields")
            for c, v in zip(columns, row):
                data[c].append(float(v))
    return columns, data


def write_metrics_csv(path, metrics: dict[str, float]) -> None:
    write_table(path, ("key", "value"),
                [(k, metrics[k]) for k in sorted(metrics)])


def read_metrics_csv(path) -> dict[str, float]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != ("key", "value"):
            raise ValueError(f"{path}: expected 'key,value' header")
        return {key: float(value) for key, value in reader}


def write_histogram_csv(path, hist) -> None:
    rows = [(start / PS_PER_NS, int(count))
            for start, count in zip(hist.bin_starts_ps, hist.counts)]
    write_table(path, ("bin_start_ns", "counts"), rows)


def write_comb_profile_csv(path, comb) -> None:
    grid_khz, od = comb_profile(comb)
    write_table(path, ("detuning_khz", "optical_depth"), list(zip(grid_khz, od)))


# ---------------------------------------------------------------------------
# table assembly

def tables3_row(run: RunAnalysis, theory_ii: float | None = None):
    th_ii = run.auto_theory if theory_ii is None else theory_ii
    return (run.pump_power_mw,
            run.auto_signal.g2, run.auto_signal.g2_err, run.auto_theory,
            run.auto_idler.g2, run.auto_idler.g2_err, th_ii,
            run.input_pass.g2.g2, run.input_pass.g2.g2_err,
            run.cs_ratio, run.cs_ratio_err, run.cs_ratio_model)


def tables4_row(run: RunAnalysis, noise_ratio: float | None):
    predicted = run.g2_input_predicted if run.g2_input_predicted is not None else math.nan
    return (run.pump_power_mw,
            run.echo_pass.g2.g2, run.echo_pass.g2.g2_err, predicted,
            run.input_pass.g2.g2, run.input_pass.g2.g2_err,
            math.nan if noise_ratio is None else noise_ratio)


def fig2b_row(run: RunAnalysis):
    from .analysis import visibility_from_g2
    return (run.pump_power_mw,
            run.input_pass.g2.g2, run.input_pass.g2.g2_err,
            run.echo_pass.g2.g2, run.echo_pass.g2.g2_err,
            visibility_from_g2(run.input_pass.g2.g2),
            visibility_from_g2(run.echo_pass.g2.g2))


def fig3bc_row(run: RunAnalysis, run_nofc: RunAnalysis | None):
    nofc_g2 = run_nofc.echo_pass.g2.g2 if run_nofc else math.nan
    nofc_err = run_nofc.echo_pass.g2.g2_err if run_nofc else math.nan
    return (run.storage_time_ps / PS_PER_NS,
            run.efficiency_observed, run.efficiency_err,
            run.efficiency_analytic, run.efficiency_numeric,
            run.echo_pass.g2.g2, run.echo_pass.g2.g2_err,
            nofc_g2, nofc_err)


# ---------------------------------------------------------------------------
# per-run and sweep output bundles

def write_point_outputs(outdir, cfg, run: RunAnalysis, plots: bool = True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, fn):
        path = outdir / name
        fn(path)
        written.append(path)

    emit("metrics.csv", lambda p: write_metrics_csv(p, run.metrics))
    emit("histogram_input.csv", lambda p: write_histogram_csv(p, run.input_pass.histogram))
    emit("histogram_echo.csv", lambda p: write_histogram_csv(p, run.echo_pass.histogram))
    emit("comb_profile.csv", lambda p: write_comb_profile_csv(p, cfg.comb))
    emit("tableS3.csv", lambda p: write_table(p, TABLE_COLUMNS["tableS3.csv"],
                                              [tables3_row(run)]))
    emit("tableS4.csv", lambda p: write_table(p, TABLE_COLUMNS["tableS4.csv"],
                                              [tables4_row(run, cfg.analysis.noise_ratio)]))
    if plots:
        written.extend(render_point_figures(outdir, cfg, run))
    return written


@dataclass
class SweepPoint:
    label: str
    run: RunAnalysis
    run_nofc: RunAnalysis | None = None
    noise_ratio: float | None = None


def write_pump_sweep_outputs(outdir, cfg, points: list[SweepPoint],
                             plots: bool = True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    rows2b = [fig2b_row(p.run) for p in points]
    rows3 = [tables3_row(p.run) for p in points]
    rows4 = [tables4_row(p.run, p.noise_ratio) for p in points]
    for name, rows in (("fig2b.csv", rows2b), ("tableS3.csv", rows3), ("tableS4.csv", rows4)):
        path = outdir / name
        write_table(path, TABLE_COLUMNS[name], rows)
        written.append(path)
    if plots:
        written.append(render_pump_sweep_figure(outdir, points))
    return written


def write_tau_sweep_outputs(outdir, cfg, points: list[SweepPoint],
                            plots: bool = True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    rows = [fig3bc_row(p.run, p.run_nofc) for p in points]
    path = outdir / "fig3bc.csv"
    write_table(path, TABLE_COLUMNS["fig3bc.csv"], rows)
    written.append(path)
    if plots:
        written.extend(render_tau_sweep_figures(outdir, cfg, points))
    return written


# ---------------------------------------------------------------------------
# figures (headless Agg; import deferred so --no-plots runs never touch it)

def _plt():
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    return plt


def render_point_figures(outdir, cfg, run: RunAnalysis) -> list[Path]:
    plt = _plt()
    outdir = Path(outdir)
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for p, color in ((run.input_pass, "tab:blue"), (run.echo_pass, "tab:red")):
        h = p.histogram
        ax.step(h.bin_starts_ps / 1000.0, h.counts, where="post",
                label=f"{p.label} pass", color=color, lw=1)
        lo = p.g2.center_ps - p.g2.window_ps // 2
        ax.axvspan(lo / 1000.0, (lo + p.g2.window_ps) / 1000.0, color=color, alpha=0.15)
    ax.set_xlabel("signal - idler delay (ns)")
    ax.set_ylabel("coincidences per bin")
    ax.legend()
    fig.tight_layout()
    path = outdir / "fig2a.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    grid_khz, od = comb_profile(cfg.comb)
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(grid_khz, od, lw=0.8)
    ax.set_xlabel("detuning (kHz)")
    ax.set_ylabel("optical depth")
    fig.tight_layout()
    path = outdir / "comb_profile.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def render_pump_sweep_figure(outdir, points: list[SweepPoint]) -> Path:
    plt = _plt()
    pumps = [p.run.pump_power_mw for p in points]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(pumps, [p.run.input_pass.g2.g2 for p in points],
                yerr=[p.run.input_pass.g2.g2_err for p in points],
                marker="o", ls="-", label="input")
    ax.errorbar(pumps, [p.run.echo_pass.g2.g2 for p in points],
                yerr=[p.run.echo_pass.g2.g2_err for p in points],
                marker="s", ls="--", label="echo")
    ax.axhline(2.0, color="gray", ls=":", lw=1, label="classical limit")
    ax.set_xlabel("pump power (mW)")
    ax.set_ylabel("cross-correlation in window")
    ax.legend()
    fig.tight_layout()
    path = Path(outdir) / "fig2b.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_tau_sweep_figures(outdir, cfg, points: list[SweepPoint]) -> list[Path]:
    plt = _plt()
    outdir = Path(outdir)
    taus_us = [p.run.storage_time_ps / 1e6 for p in points]
    written = []

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(taus_us, [p.run.efficiency_observed for p in points],
                yerr=[p.run.efficiency_err for p in points],
                marker="o", ls="none", label="simulated")
    lo = min(p.run.storage_time_ps for p in points)
    hi = max(p.run.storage_time_ps for p in points)
    grid = np.linspace(0.8 * lo, 1.1 * hi, 120).astype(np.int64)
    curve = efficiency_vs_storage_time(grid, cfg.comb.tooth_width_khz,
                                       cfg.comb.peak_depth, cfg.comb.background_depth,
                                       cfg.comb.full_od, shape=cfg.comb.shape)
    ax.plot([r[0] / 1e6 for r in curve], [r[3] for r in curve],
            color="gray", lw=1, label="analytic")
    ax.set_xlabel("storage time (us)")
    ax.set_ylabel("echo efficiency")
    ax.legend()
    fig.tight_layout()
    path = outdir / "fig3b.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(taus_us, [p.run.echo_pass.g2.g2 for p in points],
                yerr=[p.run.echo_pass.g2.g2_err for p in points],
                marker="D", ls="none", label="filter cavity in")
    if any(p.run_nofc for p in points):
        ax.errorbar(taus_us,
                    [p.run_nofc.echo_pass.g2.g2 if p.run_nofc else math.nan for p in points],
                    yerr=[p.run_nofc.echo_pass.g2.g2_err if p.run_nofc else math.nan
                          for p in points],
                    marker="s", ls="none", label="filter cavity removed")
    ax.axhline(2.0, color="gray", ls=":", lw=1, label="classical limit")
    ax.set_xlabel("storage time (us)")
    ax.set_ylabel("echo cross-correlation")
    ax.legend()
    fig.tight_layout()
    path = outdir / "fig3c.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written

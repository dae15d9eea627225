"""Command-line entry point.

Modes:
    simulate          run both passes, write timestamp files
    analyze           read two timestamp files (input pass, echo pass) and
                      produce the metric/report tables
    simulate+analyze  both of the above in one process
    sweep             repeat simulate+analyze over a pump-power or
                      storage-time axis and emit the sweep tables

Flag values override the corresponding config keys. Exit codes: 0 success,
1 configuration problem, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import (ConfigError, ExperimentConfig, build_config, format_config,
                     load_config)
from .core import IDLER_CHANNEL, SIGNAL_CHANNEL
from .detection import (TimestampFormatError, read_timestamps_binary,
                        read_timestamps_csv, write_timestamps_binary,
                        write_timestamps_csv)
from .pipeline import (analyze_run, simulate_run, with_noise_ratio,
                       with_pump_power, with_storage_time, without_filter_cavity)
from .report import (SweepPoint, write_point_outputs, write_pump_sweep_outputs,
                     write_tau_sweep_outputs)
from .units import UnitError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="afcsim",
        description="Heralded single-photon storage simulator and coincidence analyzer.")
    p.add_argument("--config", type=Path,
                   help="experiment config file (defaults apply when omitted)")
    p.add_argument("--mode", choices=["simulate", "analyze", "simulate+analyze", "sweep"],
                   help="override scenario.mode")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--out", type=Path, default=Path("afcsim-out"),
                   help="output directory (default: afcsim-out)")
    p.add_argument("--format", choices=["csv", "binary"], dest="out_format",
                   help="timestamp file format, overrides scenario.out_format")
    p.add_argument("--no-filter-cavity", action="store_true",
                   help="remove the idler filter cavity's mode selectivity")
    p.add_argument("--tau", type=float, metavar="NS",
                   help="storage time in ns, overrides memory.storage_time")
    p.add_argument("--pump-mw", type=float, metavar="MW",
                   help="pump power in mW, overrides source.pump_power")
    p.add_argument("--timestamps", nargs=2, metavar=("INPUT", "ECHO"),
                   help="timestamp files of the two passes (analyze mode)")
    p.add_argument("--no-plots", action="store_true",
                   help="skip figure rendering, tables only")
    return p


def _overrides(args) -> dict[str, str]:
    o: dict[str, str] = {}
    if args.seed is not None:
        o["run.seed"] = str(args.seed)
    if args.mode is not None:
        o["scenario.mode"] = args.mode
    if args.out_format is not None:
        o["scenario.out_format"] = args.out_format
    if args.no_filter_cavity:
        o["filter_cavity.enabled"] = "false"
    if args.tau is not None:
        o["memory.storage_time"] = f"{args.tau} ns"
    if args.pump_mw is not None:
        o["source.pump_power"] = f"{args.pump_mw} mW"
    if args.no_plots:
        o["scenario.plots"] = "false"
    return o


def point_seed(master_seed: int, index: int) -> int:
    """Deterministic per-sweep-point seed."""
    state = np.random.SeedSequence([master_seed, index]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> 1)


def _write_timestamps(outdir: Path, label: str, streams: dict[int, np.ndarray],
                      fmt: str) -> Path:
    if fmt == "csv":
        path = outdir / f"timestamps_{label}.csv"
        write_timestamps_csv(path, streams)
    else:
        path = outdir / f"timestamps_{label}.bin"
        write_timestamps_binary(path, streams)
    return path


def _read_timestamps(path: Path, fmt: str) -> dict[int, np.ndarray]:
    # the file's own extension wins; fmt only decides extensionless paths
    if path.suffix == ".bin":
        reader = read_timestamps_binary
    elif path.suffix == ".csv":
        reader = read_timestamps_csv
    else:
        reader = read_timestamps_csv if fmt == "csv" else read_timestamps_binary
    streams = reader(path)
    for channel in (IDLER_CHANNEL, SIGNAL_CHANNEL):
        if channel not in streams:
            raise TimestampFormatError(f"{path}: no events on channel {channel}")
    return streams


def _print_summary(cfg: ExperimentConfig, run) -> None:
    m = run.metrics
    print(f"pump {cfg.source.pump_power_mw} mW, storage {cfg.storage_time_ps / 1000:.0f} ns, "
          f"duration {m['duration_s']:.1f} s")
    print(f"  input: {int(m['input.heralds'])} heralds, g2 = "
          f"{m['input.g2']:.2f} +- {m['input.g2_err']:.2f}")
    print(f"  echo:  {int(m['echo.heralds'])} heralds, g2 = "
          f"{m['echo.g2']:.2f} +- {m['echo.g2_err']:.2f}")
    print(f"  efficiency {m['efficiency.observed']:.4f} +- {m['efficiency.err']:.4f} "
          f"(analytic {m['efficiency.analytic']:.4f})")


def _run_point(cfg: ExperimentConfig, outdir: Path, write_files: bool, analyze: bool):
    """simulate [+ write timestamps] [+ analyze]; returns RunAnalysis or None."""
    outdir.mkdir(parents=True, exist_ok=True)
    input_pass, echo_pass = simulate_run(cfg)
    if write_files:
        fmt = cfg.scenario.out_format
        _write_timestamps(outdir, "input", input_pass.channel_streams(), fmt)
        _write_timestamps(outdir, "echo", echo_pass.channel_streams(), fmt)
        (outdir / "config_resolved.cfg").write_text(format_config(cfg))
    if not analyze:
        return None
    run = analyze_run(cfg, input_pass.channel_streams(), echo_pass.channel_streams())
    write_point_outputs(outdir, cfg, run, plots=cfg.scenario.plots)
    return run


def _run_sweep(cfg: ExperimentConfig, outdir: Path) -> None:
    sc = cfg.scenario
    outdir.mkdir(parents=True, exist_ok=True)
    points: list[SweepPoint] = []
    if sc.sweep_pump_mw:
        axis = [("pump", mw) for mw in sc.sweep_pump_mw]
    else:
        axis = [("tau", tau) for tau in sc.sweep_tau_ps]
    for k, (kind, value) in enumerate(axis):
        pcfg = with_pump_power(cfg, value) if kind == "pump" else with_storage_time(cfg, value)
        noise_ratio = None
        if sc.sweep_noise_ratio is not None and k < len(sc.sweep_noise_ratio):
            noise_ratio = sc.sweep_noise_ratio[k]
            pcfg = with_noise_ratio(pcfg, noise_ratio)
        pcfg = replace(pcfg, seed=point_seed(cfg.seed, k))
        label = f"point_{k:02d}_{kind}_{value:g}" if kind == "pump" \
            else f"point_{k:02d}_tau_{value / 1000:g}ns"
        run = _run_point(pcfg, outdir / label, write_files=True, analyze=True)
        run_nofc = None
        if sc.compare_filter_cavity:
            ncfg = without_filter_cavity(pcfg)
            run_nofc = _run_point(ncfg, outdir / (label + "_nofc"),
                                  write_files=True, analyze=True)
        points.append(SweepPoint(label=label, run=run, run_nofc=run_nofc,
                                 noise_ratio=noise_ratio))
        _print_summary(pcfg, run)
    if sc.sweep_pump_mw:
        write_pump_sweep_outputs(outdir, cfg, points, plots=sc.plots)
    else:
        write_tau_sweep_outputs(outdir, cfg, points, plots=sc.plots)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold those into the config-error code
        return 0 if exc.code in (0, None) else 1

    try:
        overrides = _overrides(args)
        if args.config is not None:
            cfg = load_config(args.config, overrides)
        else:
            cfg = build_config(overrides)
    except (ConfigError, UnitError, OSError) as exc:
        print(f"afcsim: config error: {exc}", file=sys.stderr)
        return 1

    try:
        outdir = args.out
        mode = cfg.scenario.mode
        if mode == "sweep":
            _run_sweep(cfg, outdir)
        elif mode == "analyze":
            if not args.timestamps:
                print("afcsim: analyze mode needs --timestamps INPUT ECHO", file=sys.stderr)
                return 1
            fmt = cfg.scenario.out_format
            input_streams = _read_timestamps(Path(args.timestamps[0]), fmt)
            echo_streams = _read_timestamps(Path(args.timestamps[1]), fmt)
            outdir.mkdir(parents=True, exist_ok=True)
            run = analyze_run(cfg, input_streams, echo_streams)
            write_point_outputs(outdir, cfg, run, plots=cfg.scenario.plots)
            _print_summary(cfg, run)
        else:
            run = _run_point(cfg, outdir, write_files=True,
                             analyze=(mode == "simulate+analyze"))
            if run is not None:
                _print_summary(cfg, run)
            else:
                print(f"timestamp files written to {outdir}")
        return 0
    except (TimestampFormatError, FileNotFoundError) as exc:
        print(f"afcsim: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"afcsim: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

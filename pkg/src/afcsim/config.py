"""Experiment configuration.

File format: UTF-8 text, one `section.key = value` per line, `#` comments,
blank lines ignored. Dimensioned values carry explicit unit suffixes
(ps/ns/us/ms/s, Hz/kHz/MHz/GHz, mW, pct, deg); unknown keys or suffixes are
hard errors. The loss-table sections (signal_loss, idler_loss, post_loss)
accept arbitrary element names; every other key is schema-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .analysis import EfficiencyBudget
from .chain import ArmChain, CavitySpec, DichroismModel, LossTable
from .core import SpectralMode
from .detection import DetectorSpec
from .memory import (IN_LINE, OUT_OF_LINE, RESONANT, CombParams,
                     afc_efficiency_analytic, classify_spectral,
                     comb_from_storage_time, comb_transmission)
from .source import SourceParams
from .units import UnitError, parse_frequency, parse_scalar


class ConfigError(ValueError):
    """Unknown key, bad unit, failed validation or inconsistent combination."""


# kind -> canonical representation
#   time: int ps | freq:<unit>: float in <unit> | power: float mW
#   fraction: float 0..1 (accepts pct or plain) | float/int/str/bool | list:*
_SCHEMA: dict[str, tuple[str, str | None]] = {
    "run.duration": ("time", "60 s"),
    "run.seed": ("int", "1"),

    "source.pump_power": ("power", "2 mW"),
    "source.pair_rate_per_mw": ("float", "77600"),
    "source.noise_rate_per_mw": ("float", "0"),
    "source.noise_to_signal": ("float", None),           # alternative to noise_rate_per_mw
    "source.correlation_decay": ("time", "108 ns"),
    "source.decay_convention": ("str", "one_over_e"),
    "source.resonant_mode_index": ("int", "1"),
    "source.cluster_spacing": ("freq:MHz", "44500 MHz"),
    "source.mode_spacing": ("freq:MHz", "412 MHz"),
    "source.duty": ("fraction", "45 pct"),
    "source.duty_period": ("time", "20 ms"),
    "source.gate_lead": ("time", "500 ns"),
    "source.gate_hold": ("time", "20 us"),
    "source.signal_escape": ("fraction", "1.0"),

    "etalon.fsr": ("freq:MHz", "60000 MHz"),
    "etalon.linewidth": ("freq:MHz", "10000 MHz"),
    "etalon.loss_row": ("str", "etalon"),

    "filter_cavity.fsr": ("freq:MHz", "16800 MHz"),
    "filter_cavity.linewidth": ("freq:MHz", "80 MHz"),
    "filter_cavity.loss_row": ("str", "filter_cavity"),
    "filter_cavity.enabled": ("bool", "true"),

    "memory.storage_time": ("time", "2 us"),
    "memory.tooth_width": ("freq:kHz", "76 kHz"),
    "memory.peak_depth": ("float", "4.9"),
    "memory.background_depth": ("float", "0.56"),
    "memory.full_od": ("float", "6.9"),
    "memory.shape": ("str", "gaussian"),
    "memory.total_width": ("freq:MHz", "3.5 MHz"),
    "memory.pit_transmission": ("fraction", "1.0"),
    "memory.shutter_duty": ("fraction", "50 pct"),
    "memory.shutter_period": ("time", "600 ms"),

    "detectors.idler_efficiency": ("fraction", "10 pct"),
    "detectors.idler_dark_rate": ("freq:Hz", "400 Hz"),
    "detectors.idler_dead_time": ("time", "0 ps"),
    "detectors.signal_efficiency": ("fraction", "32 pct"),
    "detectors.signal_dark_rate": ("freq:Hz", "10 Hz"),
    "detectors.signal_dead_time": ("time", "0 ps"),

    "dichroism.od_d1": ("float", "1.4"),
    "dichroism.od_d2": ("float", "6.9"),

    "analysis.bin_width": ("time", "5 ns"),
    "analysis.window": ("time", "400 ns"),
    "analysis.noise_offset": ("time", "400 ns"),
    "analysis.noise_width": ("time", "1 us"),
    "analysis.delay_min": ("time", "-2 us"),
    "analysis.delay_margin": ("time", "2 us"),
    "analysis.auto_range": ("time", "2 us"),
    "analysis.coherence_time": ("time", "265 ns"),
    "analysis.noise_to_signal_a": ("float", "0.85"),
    "analysis.noise_to_signal_b": ("float", "0.98"),
    "analysis.auto_window_form": ("str", "excess"),
    "analysis.noise_ratio": ("float", None),              # r for echo->input prediction

    "scenario.mode": ("str", "simulate+analyze"),
    "scenario.out_format": ("str", "csv"),
    "scenario.sweep_pump": ("list:power", None),
    "scenario.sweep_tau": ("list:time", None),
    "scenario.sweep_noise_ratio": ("list:float", None),
    "scenario.compare_filter_cavity": ("bool", "false"),
    "scenario.plots": ("bool", "true"),
}

_TABLE_SECTIONS = ("signal_loss", "idler_loss", "post_loss")

_DEFAULT_TABLES = {
    "signal_loss": (("dichroic_mirror", "99 pct"), ("glass_plate", "84 pct"),
                    ("band_pass_filter", "95 pct"), ("etalon", "90 pct"),
                    ("fiber", "31 pct"), ("other_optical_elements", "80 pct")),
    "idler_loss": (("dichroic_mirror", "93 pct"), ("glass_plate", "80 pct"),
                   ("filter_cavity", "50 pct"), ("fiber", "60 pct")),
    "post_loss": (("cryostat", "75 pct"), ("fiber", "60 pct")),
}


@dataclass(frozen=True)
class AnalysisParams:
    bin_width_ps: int
    window_ps: int
    noise_offset_ps: int
    noise_width_ps: int
    delay_min_ps: int
    delay_margin_ps: int
    auto_range_ps: int
    coherence_time_ps: int
    noise_to_signal_a: float
    noise_to_signal_b: float
    auto_window_form: str
    noise_ratio: float | None


@dataclass(frozen=True)
class ScenarioParams:
    mode: str
    out_format: str
    sweep_pump_mw: tuple[float, ...] | None
    sweep_tau_ps: tuple[int, ...] | None
    sweep_noise_ratio: tuple[float, ...] | None
    compare_filter_cavity: bool
    plots: bool


@dataclass(frozen=True)
class ExperimentConfig:
    duration_ps: int
    seed: int
    source: SourceParams
    signal_chain: ArmChain
    idler_chain: ArmChain
    post_losses: LossTable
    storage_time_ps: int
    comb: CombParams
    shutter_duty: float
    shutter_period_ps: int
    det_signal: DetectorSpec
    det_idler: DetectorSpec
    dichroism: DichroismModel
    analysis: AnalysisParams
    scenario: ScenarioParams

    def modes(self) -> tuple[SpectralMode, ...]:
        return self.source.modes()

    def budget(self) -> EfficiencyBudget:
        return EfficiencyBudget(
            eta_signal_chain=self.signal_chain.losses.product(),
            eta_idler_chain=self.idler_chain.losses.product(),
            eta_post=self.post_losses.product() * self.shutter_duty,
            eta_det_signal=self.det_signal.efficiency,
            eta_det_idler=self.det_idler.efficiency,
        )

    def expected_rates(self, prepared: bool, include_duty: bool = True) -> "ExpectedRates":
        """Analytic detected singles rates, ignoring the pump gate (its duty
        loss cancels in signal/noise ratios because it thins emissions)."""
        modes = self.modes()
        n_modes = len(modes)
        src = self.source
        pair_rate = src.pump_power_mw * src.pair_rate_per_mw_hz
        duty_src = src.duty_fraction if include_duty else 1.0
        duty_shutter = self.shutter_duty if include_duty else 1.0
        post = self.post_losses.product() * self.det_signal.efficiency * duty_shutter

        signal_hz = 0.0
        idler_hz = 0.0
        for i, mode in enumerate(modes):
            weight = pair_rate / n_modes
            idler_hz += weight * self.idler_chain.mode_survival(mode) * self.det_idler.efficiency
            mem = self._memory_pass_probability(mode, prepared)
            signal_hz += (weight * src.signal_escape
                          * self.signal_chain.mode_survival(mode) * mem * post)
        noise_rate = src.pump_power_mw * src.noise_rate_per_mw_hz
        noise_hz = (noise_rate * self.signal_chain.broadband_survival()
                    * math.exp(-self.comb.full_od) * post)
        return ExpectedRates(signal_hz * duty_src, noise_hz * duty_src,
                             idler_hz * duty_src)

    def _memory_pass_probability(self, mode: SpectralMode | None, prepared: bool) -> float:
        cls = classify_spectral(mode)
        if cls == RESONANT:
            if prepared:
                return afc_efficiency_analytic(self.comb) + comb_transmission(self.comb)
            return self.comb.pit_transmission
        if cls == IN_LINE:
            return math.exp(-self.comb.full_od)
        assert cls == OUT_OF_LINE
        return 1.0


@dataclass(frozen=True)
class ExpectedRates:
    signal_detected_hz: float   # pair photons at the signal detector
    noise_detected_hz: float    # broadband noise at the signal detector
    idler_detected_hz: float    # pair photons at the idler detector (no darks)


# ---------------------------------------------------------------------------
# parsing

def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    """Flat key -> raw value string; checks key validity and duplicates."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{origin}:{lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        section = key.split(".", 1)[0] if "." in key else ""
        if key not in _SCHEMA and section not in _TABLE_SECTIONS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        if section in _TABLE_SECTIONS and key.count(".") != 1:
            raise ConfigError(f"{origin}:{lineno}: loss-table keys are '<table>.<element>'")
        if key in raw:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{origin}:{lineno}: empty value for {key!r}")
        raw[key] = value
    return raw


def _convert(key: str, kind: str, raw_value: str):
    try:
        if kind == "str":
            return raw_value
        if kind == "bool":
            if raw_value.lower() in ("true", "yes", "on"):
                return True
            if raw_value.lower() in ("false", "no", "off"):
                return False
            raise ConfigError(f"{key}: expected true/false, got {raw_value!r}")
        if kind.startswith("list:"):
            inner = kind.split(":", 1)[1]
            items = [item.strip() for item in raw_value.split(",")]
            return tuple(_convert(key, inner, item) for item in items if item)
        if kind.startswith("freq:"):
            return parse_frequency(raw_value, canonical=kind.split(":", 1)[1])
        parsed_kind, value = parse_scalar(raw_value)
        if kind == "int":
            if parsed_kind != "plain" or value != int(value):
                raise ConfigError(f"{key}: expected a bare integer, got {raw_value!r}")
            return int(value)
        if kind == "float":
            if parsed_kind != "plain":
                raise ConfigError(f"{key}: expected a bare number, got {raw_value!r}")
            return float(value)
        if kind == "time":
            if parsed_kind != "time":
                raise ConfigError(f"{key}: expected a time with unit suffix, got {raw_value!r}")
            return int(value)
        if kind == "power":
            if parsed_kind == "power":
                return float(value)
            raise ConfigError(f"{key}: expected a power in mW, got {raw_value!r}")
        if kind == "fraction":
            if parsed_kind == "fraction":
                return float(value)
            if parsed_kind == "plain" and 0 <= value <= 1:
                return float(value)
            raise ConfigError(f"{key}: expected 'x pct' or a fraction in [0,1], got {raw_value!r}")
        raise ConfigError(f"{key}: unhandled kind {kind!r}")
    except UnitError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def build_config(raw: dict[str, str]) -> ExperimentConfig:
    """Resolve raw strings against the schema, apply defaults, and assemble
    validated domain objects."""
    values: dict[str, object] = {}
    for key, (kind, default) in _SCHEMA.items():
        if key in raw:
            values[key] = _convert(key, kind, raw[key])
        elif default is not None:
            values[key] = _convert(key, kind, default)
        else:
            values[key] = None

    tables: dict[str, LossTable] = {}
    for section in _TABLE_SECTIONS:
        rows = [(k.split(".", 1)[1], v) for k, v in raw.items() if k.startswith(section + ".")]
        if not rows:
            rows = list(_DEFAULT_TABLES[section])
        try:
            tables[section] = LossTable(tuple(
                (name, _convert(f"{section}.{name}", "fraction", val)) for name, val in rows))
        except ValueError as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc

    return _assemble(values, tables)


def _assemble(v: dict[str, object], tables: dict[str, LossTable]) -> ExperimentConfig:
    def err(msg: str) -> ConfigError:
        return ConfigError(msg)

    duration = int(v["run.duration"])
    if duration <= 0:
        raise err("run.duration must be positive")
    seed = int(v["run.seed"])

    if v["source.noise_to_signal"] is not None and float(v["source.noise_rate_per_mw"]) > 0:
        raise err("give either source.noise_rate_per_mw or source.noise_to_signal, not both")

    try:
        src = SourceParams(
            pump_power_mw=float(v["source.pump_power"]),
            pair_rate_per_mw_hz=float(v["source.pair_rate_per_mw"]),
            noise_rate_per_mw_hz=float(v["source.noise_rate_per_mw"]),
            correlation_decay_ps=int(v["source.correlation_decay"]),
            decay_convention=str(v["source.decay_convention"]),
            resonant_mode_index=int(v["source.resonant_mode_index"]),
            cluster_spacing_mhz=float(v["source.cluster_spacing"]),
            mode_spacing_mhz=float(v["source.mode_spacing"]),
            duty_fraction=float(v["source.duty"]),
            duty_period_ps=int(v["source.duty_period"]),
            gate_lead_ps=int(v["source.gate_lead"]),
            gate_hold_ps=int(v["source.gate_hold"]),
            signal_escape=float(v["source.signal_escape"]),
        )

        etalon_row = str(v["etalon.loss_row"])
        cavity_row = str(v["filter_cavity.loss_row"])
        if etalon_row not in tables["signal_loss"]:
            raise err(f"signal loss table lacks the etalon row {etalon_row!r}")
        if cavity_row not in tables["idler_loss"]:
            raise err(f"idler loss table lacks the filter-cavity row {cavity_row!r}")
        signal_chain = ArmChain(
            losses=tables["signal_loss"],
            filter_spec=CavitySpec("etalon", float(v["etalon.fsr"]),
                                   float(v["etalon.linewidth"]),
                                   tables["signal_loss"].get(etalon_row)),
            filter_row=etalon_row,
        )
        idler_chain = ArmChain(
            losses=tables["idler_loss"],
            filter_spec=CavitySpec("filter_cavity", float(v["filter_cavity.fsr"]),
                                   float(v["filter_cavity.linewidth"]),
                                   tables["idler_loss"].get(cavity_row)),
            filter_row=cavity_row,
            mode_selective=bool(v["filter_cavity.enabled"]),
        )

        storage_time = int(v["memory.storage_time"])
        comb = comb_from_storage_time(
            storage_time, float(v["memory.tooth_width"]), float(v["memory.peak_depth"]),
            float(v["memory.background_depth"]), float(v["memory.full_od"]),
            shape=str(v["memory.shape"]), total_width_mhz=float(v["memory.total_width"]),
            pit_transmission=float(v["memory.pit_transmission"]))

        det_idler = DetectorSpec(float(v["detectors.idler_efficiency"]),
                                 float(v["detectors.idler_dark_rate"]),
                                 int(v["detectors.idler_dead_time"]))
        det_signal = DetectorSpec(float(v["detectors.signal_efficiency"]),
                                  float(v["detectors.signal_dark_rate"]),
                                  int(v["detectors.signal_dead_time"]))
    except (ValueError, NotImplementedError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    shutter_duty = float(v["memory.shutter_duty"])
    shutter_period = int(v["memory.shutter_period"])
    if not 0 < shutter_duty <= 1 or shutter_period <= 0:
        raise err("memory shutter duty/period out of range")

    bin_width = int(v["analysis.bin_width"])
    window = int(v["analysis.window"])
    if bin_width <= 0 or window <= 0 or window % bin_width:
        raise err("analysis.window must be a positive multiple of analysis.bin_width")
    if storage_time % bin_width:
        raise err("memory.storage_time must align with analysis.bin_width")
    form = str(v["analysis.auto_window_form"])
    if form not in ("excess", "printed"):
        raise err("analysis.auto_window_form must be 'excess' or 'printed'")
    analysis = AnalysisParams(
        bin_width_ps=bin_width,
        window_ps=window,
        noise_offset_ps=int(v["analysis.noise_offset"]),
        noise_width_ps=int(v["analysis.noise_width"]),
        delay_min_ps=int(v["analysis.delay_min"]),
        delay_margin_ps=int(v["analysis.delay_margin"]),
        auto_range_ps=int(v["analysis.auto_range"]),
        coherence_time_ps=int(v["analysis.coherence_time"]),
        noise_to_signal_a=float(v["analysis.noise_to_signal_a"]),
        noise_to_signal_b=float(v["analysis.noise_to_signal_b"]),
        auto_window_form=form,
        noise_ratio=None if v["analysis.noise_ratio"] is None else float(v["analysis.noise_ratio"]),
    )
    if analysis.noise_ratio is not None and analysis.noise_ratio < 0:
        raise err("analysis.noise_ratio must be non-negative")

    mode = str(v["scenario.mode"])
    if mode not in ("simulate", "analyze", "simulate+analyze", "sweep"):
        raise err(f"unknown scenario.mode {mode!r}")
    out_format = str(v["scenario.out_format"])
    if out_format not in ("csv", "binary"):
        raise err("scenario.out_format must be 'csv' or 'binary'")
    scenario = ScenarioParams(
        mode=mode,
        out_format=out_format,
        sweep_pump_mw=v["scenario.sweep_pump"],
        sweep_tau_ps=v["scenario.sweep_tau"],
        sweep_noise_ratio=v["scenario.sweep_noise_ratio"],
        compare_filter_cavity=bool(v["scenario.compare_filter_cavity"]),
        plots=bool(v["scenario.plots"]),
    )
    if mode == "sweep" and not (scenario.sweep_pump_mw or scenario.sweep_tau_ps):
        raise err("sweep mode needs scenario.sweep_pump or scenario.sweep_tau")
    if scenario.sweep_pump_mw and scenario.sweep_tau_ps:
        raise err("sweep over either pump power or storage time, not both")
    if scenario.sweep_noise_ratio is not None and scenario.sweep_pump_mw is not None \
            and len(scenario.sweep_noise_ratio) != len(scenario.sweep_pump_mw):
        raise err("scenario.sweep_noise_ratio must match scenario.sweep_pump in length")

    cfg = ExperimentConfig(
        duration_ps=duration, seed=seed, source=src,
        signal_chain=signal_chain, idler_chain=idler_chain,
        post_losses=tables["post_loss"],
        storage_time_ps=storage_time, comb=comb,
        shutter_duty=shutter_duty, shutter_period_ps=shutter_period,
        det_signal=det_signal, det_idler=det_idler,
        dichroism=DichroismModel(float(v["dichroism.od_d1"]), float(v["dichroism.od_d2"])),
        analysis=analysis, scenario=scenario,
    )

    target = v["source.noise_to_signal"]
    if target is not None:
        cfg = replace(cfg, source=replace(src, noise_rate_per_mw_hz=
                                          _calibrate_noise_rate(cfg, float(target))))
    return cfg


def _calibrate_noise_rate(cfg: ExperimentConfig, target_ratio: float) -> float:
    """Raw noise rate per mW that makes detected background/signal equal the
    target in a transparency-window run (dark counts excluded)."""
    if target_ratio < 0:
        raise ConfigError("source.noise_to_signal must be non-negative")
    rates = cfg.expected_rates(prepared=False)
    post = cfg.post_losses.product() * cfg.det_signal.efficiency * cfg.shutter_duty
    per_emission = (cfg.signal_chain.broadband_survival()
                    * math.exp(-cfg.comb.full_od) * post)
    if per_emission <= 0 or rates.signal_detected_hz <= 0:
        raise ConfigError("cannot calibrate noise rate: no detectable signal path")
    wanted_detected = target_ratio * rates.signal_detected_hz
    return wanted_detected / (per_emission * cfg.source.duty_fraction
                              * cfg.source.pump_power_mw)


def load_config(path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    raw = parse_config_text(Path(path).read_text(), origin=str(path))
    if overrides:
        for key, value in overrides.items():
            section = key.split(".", 1)[0]
            if key not in _SCHEMA and section not in _TABLE_SECTIONS:
                raise ConfigError(f"unknown override key {key!r}")
            raw[key] = value
    return build_config(raw)


def default_config() -> ExperimentConfig:
    return build_config({})


def reference_config_path(name: str) -> Path:
    """Path to a packaged reference config (e.g. 'point_2mw')."""
    base = resources.files("afcsim") / "configs" / f"{name}.cfg"
    if not base.is_file():
        available = sorted(p.stem for p in (resources.files("afcsim") / "configs").iterdir())
        raise ConfigError(f"no reference config {name!r}; available: {available}")
    return Path(str(base))


# ---------------------------------------------------------------------------
# formatting (round-trip: parse(format(cfg)) == cfg)

def format_config(cfg: ExperimentConfig) -> str:
    src = cfg.source
    ana = cfg.analysis
    sc = cfg.scenario
    lines = ["# resolved experiment configuration"]

    def emit(key: str, text: str):
        lines.append(f"{key} = {text}")

    from .units import format_time_ps as t

    emit("run.duration", t(cfg.duration_ps))
    emit("run.seed", repr(cfg.seed))
    emit("source.pump_power", f"{src.pump_power_mw!r} mW")
    emit("source.pair_rate_per_mw", repr(src.pair_rate_per_mw_hz))
    emit("source.noise_rate_per_mw", repr(src.noise_rate_per_mw_hz))
    emit("source.correlation_decay", t(src.correlation_decay_ps))
    emit("source.decay_convention", src.decay_convention)
    emit("source.resonant_mode_index", repr(src.resonant_mode_index))
    emit("source.cluster_spacing", f"{src.cluster_spacing_mhz!r} MHz")
    emit("source.mode_spacing", f"{src.mode_spacing_mhz!r} MHz")
    emit("source.duty", repr(src.duty_fraction))
    emit("source.duty_period", t(src.duty_period_ps))
    emit("source.gate_lead", t(src.gate_lead_ps))
    emit("source.gate_hold", t(src.gate_hold_ps))
    emit("source.signal_escape", repr(src.signal_escape))
    for section, table in (("signal_loss", cfg.signal_chain.losses),
                           ("idler_loss", cfg.idler_chain.losses),
                           ("post_loss", cfg.post_losses)):
        for name, value in table.elements:
            emit(f"{section}.{name}", repr(value))
    emit("etalon.fsr", f"{cfg.signal_chain.filter_spec.fsr_mhz!r} MHz")
    emit("etalon.linewidth", f"{cfg.signal_chain.filter_spec.linewidth_fwhm_mhz!r} MHz")
    emit("etalon.loss_row", cfg.signal_chain.filter_row)
    emit("filter_cavity.fsr", f"{cfg.idler_chain.filter_spec.fsr_mhz!r} MHz")
    emit("filter_cavity.linewidth", f"{cfg.idler_chain.filter_spec.linewidth_fwhm_mhz!r} MHz")
    emit("filter_cavity.loss_row", cfg.idler_chain.filter_row)
    emit("filter_cavity.enabled", "true" if cfg.idler_chain.mode_selective else "false")
    emit("memory.storage_time", t(cfg.storage_time_ps))
    emit("memory.tooth_width", f"{cfg.comb.tooth_width_khz!r} kHz")
    emit("memory.peak_depth", repr(cfg.comb.peak_depth))
    emit("memory.background_depth", repr(cfg.comb.background_depth))
    emit("memory.full_od", repr(cfg.comb.full_od))
    emit("memory.shape", cfg.comb.shape)
    emit("memory.total_width", f"{cfg.comb.total_width_mhz!r} MHz")
    emit("memory.pit_transmission", repr(cfg.comb.pit_transmission))
    emit("memory.shutter_duty", repr(cfg.shutter_duty))
    emit("memory.shutter_period", t(cfg.shutter_period_ps))
    emit("detectors.idler_efficiency", repr(cfg.det_idler.efficiency))
    emit("detectors.idler_dark_rate", f"{cfg.det_idler.dark_rate_hz!r} Hz")
    emit("detectors.idler_dead_time", t(cfg.det_idler.dead_time_ps))
    emit("detectors.signal_efficiency", repr(cfg.det_signal.efficiency))
    emit("detectors.signal_dark_rate", f"{cfg.det_signal.dark_rate_hz!r} Hz")
    emit("detectors.signal_dead_time", t(cfg.det_signal.dead_time_ps))
    emit("dichroism.od_d1", repr(cfg.dichroism.od_d1))
    emit("dichroism.od_d2", repr(cfg.dichroism.od_d2))
    emit("analysis.bin_width", t(ana.bin_width_ps))
    emit("analysis.window", t(ana.window_ps))
    emit("analysis.noise_offset", t(ana.noise_offset_ps))
    emit("analysis.noise_width", t(ana.noise_width_ps))
    emit("analysis.delay_min", t(ana.delay_min_ps))
    emit("analysis.delay_margin", t(ana.delay_margin_ps))
    emit("analysis.auto_range", t(ana.auto_range_ps))
    emit("analysis.coherence_time", t(ana.coherence_time_ps))
    emit("analysis.noise_to_signal_a", repr(ana.noise_to_signal_a))
    emit("analysis.noise_to_signal_b", repr(ana.noise_to_signal_b))
    emit("analysis.auto_window_form", ana.auto_window_form)
    if ana.noise_ratio is not None:
        emit("analysis.noise_ratio", repr(ana.noise_ratio))
    emit("scenario.mode", sc.mode)
    emit("scenario.out_format", sc.out_format)
    if sc.sweep_pump_mw:
        emit("scenario.sweep_pump", ", ".join(f"{p!r} mW" for p in sc.sweep_pump_mw))
    if sc.sweep_tau_ps:
        emit("scenario.sweep_tau", ", ".join(t(tau) for tau in sc.sweep_tau_ps))
    if sc.sweep_noise_ratio:
        emit("scenario.sweep_noise_ratio", ", ".join(repr(r) for r in sc.sweep_noise_ratio))
    emit("scenario.compare_filter_cavity", "true" if sc.compare_filter_cavity else "false")
    emit("scenario.plots", "true" if sc.plots else "false")
    return "\n".join(lines) + "\n"

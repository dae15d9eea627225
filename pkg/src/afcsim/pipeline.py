"""End-to-end simulation passes and run-level analysis.

One storage pass:

1. draw candidate pair and broadband-noise emissions (duty-gated Poisson),
2. thin the idler arm (chain survival times detector efficiency) into herald
   candidates,
3. resolve heralds sequentially in time order: every registered idler click,
   photon or dark, opens a pump-off window; pair/noise emissions strictly
   inside the off union are voided, along with their own idler candidates,
4. push surviving signal photons through escape, filter chain, storage and
   post losses, and gate them at the signal detector.

Pump-off windows act with an open left edge: the pair that triggers a window
is already emitted when the pump shuts off, so a window voids only strictly
later emissions. Because every window starts at or after its own click time,
the sequential decision for each candidate equals a membership test against
the final merged off-schedule, which lets steps 3-4 run vectorized after one
O(n) pass over the (sparse) herald candidates.

A run is a pair of passes over the same random streams: a transparency-window
pass (comb not written) and a storage pass (comb written). Sharing streams
couples the two, so the echo click set is statistically a thinned copy of the
input click set and efficiency ratios are clean binomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import (CorrelationHistogram, CorrelationResult,
                       autocorrelation_g2, cauchy_schwarz_ratio,
                       cross_correlation_histogram, default_noise_windows,
                       g2_auto_theory, g2_input_prediction, g2_windowed,
                       heralding_efficiency, visibility_from_g2)
from .core import IDLER_CHANNEL, SIGNAL_CHANNEL, Intervals, RandomStreams, periodic_on_intervals
from .detection import ClickStream, dark_clicks, merge_clicks
from .memory import (ABSORBED, ECHOED, TRANSMITTED,
                     afc_efficiency_analytic, afc_efficiency_numeric,
                     classify_spectral, comb_from_storage_time,
                     storage_transform_batch)
from .source import sample_broadband_noise, sample_pair_emissions
from .units import PS_PER_S

INPUT_PASS = "input"
ECHO_PASS = "echo"


@dataclass
class PassDiagnostics:
    n_pairs_emitted: int = 0
    n_noise_emitted: int = 0   # after folding chain and line absorption into the rate
    n_pairs_vetoed: int = 0
    n_noise_vetoed: int = 0
    n_herald_photons: int = 0
    n_herald_darks: int = 0
    n_candidates_voided: int = 0
    n_at_memory_resonant: int = 0
    n_signal_clicks_echoed: int = 0
    n_signal_clicks_transmitted: int = 0
    n_signal_clicks_noise: int = 0
    n_signal_darks: int = 0
    pump_off_total_ps: int = 0


@dataclass
class PassResult:
    label: str
    prepared: bool
    duration_ps: int
    idler: ClickStream
    signal: ClickStream
    off_schedule: Intervals
    diagnostics: PassDiagnostics

    def channel_streams(self) -> dict[int, np.ndarray]:
        return {IDLER_CHANNEL: self.idler.times_ps, SIGNAL_CHANNEL: self.signal.times_ps}


def _resolve_heralds(cand_times: np.ndarray, cand_is_dark: np.ndarray,
                     off_lead_ps: int, hold_ps: int):
    """Sequential pass over time-sorted idler candidates.

    A photon candidate is voided when some earlier registered click opened a
    window strictly covering it, i.e. when a registered time lies in the open
    interval (t - off_lead - hold, t - off_lead). Darks always register.
    Returns a keep mask over the candidates.
    """
    keep = np.ones(cand_times.size, dtype=bool)
    registered: list[int] = []
    ptr = 0  # count of registered times < t - off_lead, monotone in t
    for i in range(cand_times.size):
        t = int(cand_times[i])
        threshold = t - off_lead_ps
        while ptr < len(registered) and registered[ptr] < threshold:
            ptr += 1
        covered = ptr >= 1 and registered[ptr - 1] > threshold - hold_ps
        if covered and not cand_is_dark[i]:
            keep[i] = False
            continue
        registered.append(t)
    return keep


def simulate_pass(cfg, prepared: bool, label: str | None = None,
                  seed: int | None = None) -> PassResult:
    """Simulate one pass; `prepared` selects comb-written vs transparency."""
    src = cfg.source
    duration = cfg.duration_ps
    streams = RandomStreams(cfg.seed if seed is None else seed)
    label = label or (ECHO_PASS if prepared else INPUT_PASS)
    diag = PassDiagnostics()

    duty = src.duty_intervals(duration)
    pairs = sample_pair_emissions(src, duration, streams, duty)
    # broadband noise sees the passive chain and the untailored line the same
    # way in both passes, so those Bernoulli factors fold into the Poisson
    # rate up front (exact thinning); only gating and detection remain per event
    noise_thin = cfg.signal_chain.broadband_survival() * math.exp(-cfg.comb.full_od)
    noise_times = sample_broadband_noise(src, duration, streams, duty,
                                         rate_scale=noise_thin)
    diag.n_pairs_emitted = len(pairs)
    diag.n_noise_emitted = int(noise_times.size)

    modes = cfg.modes()
    n_pairs = len(pairs)

    # idler arm: one joint Bernoulli for chain survival and detector efficiency
    surv_idler = cfg.idler_chain.survival_by_mode(modes) * cfg.det_idler.efficiency
    u_idler = streams.stream("pair.idler").random(n_pairs)
    idler_hit = u_idler < surv_idler[pairs.mode_idx]

    dark_idler = dark_clicks(cfg.det_idler, duty, streams.stream("dark.idler"))
    cand_times = np.concatenate([pairs.times_ps[idler_hit], dark_idler])
    cand_is_dark = np.concatenate([np.zeros(int(np.sum(idler_hit)), dtype=bool),
                                   np.ones(dark_idler.size, dtype=bool)])
    order = np.argsort(cand_times, kind="stable")
    cand_times = cand_times[order]
    cand_is_dark = cand_is_dark[order]

    off_lead = max(cfg.storage_time_ps - src.gate_lead_ps, 0)
    keep = _resolve_heralds(cand_times, cand_is_dark, off_lead, src.gate_hold_ps)
    herald_times = cand_times[keep]
    herald_is_dark = cand_is_dark[keep]
    diag.n_candidates_voided = int(np.sum(~keep))
    diag.n_herald_photons = int(np.sum(~herald_is_dark))
    diag.n_herald_darks = int(np.sum(herald_is_dark))

    if herald_times.size:
        off = Intervals.from_pairs(
            [(int(t) + off_lead, int(t) + off_lead + src.gate_hold_ps) for t in herald_times])
    else:
        off = Intervals()
    diag.pump_off_total_ps = off.total_ps()
    idler_clicks = ClickStream(herald_times.astype(np.int64), ~herald_is_dark)

    # veto emissions that fell strictly inside a pump-off window
    keep_pair = ~off.contains_open(pairs.times_ps)
    keep_noise = ~off.contains_open(noise_times)
    diag.n_pairs_vetoed = int(np.sum(~keep_pair))
    diag.n_noise_vetoed = int(np.sum(~keep_noise))

    # per-emission uniforms are drawn for the full candidate set so a pass
    # with the comb written consumes streams identically to one without
    u_chain = streams.stream("pair.signal.chain").random(n_pairs)
    u_mem = streams.stream("pair.signal.mem").random(n_pairs)
    u_det = streams.stream("pair.signal.det").random(n_pairs)
    un_det = streams.stream("noise.det").random(noise_times.size)

    surv_signal = cfg.signal_chain.survival_by_mode(modes) * src.signal_escape
    class_by_mode = np.array([classify_spectral(m) for m in modes], dtype=np.int8)

    at_memory = keep_pair & (u_chain < surv_signal[pairs.mode_idx])
    arrivals = pairs.times_ps + pairs.delta_ps
    classes = class_by_mode[pairs.mode_idx]
    diag.n_at_memory_resonant = int(np.sum(at_memory & (classes == 0)))

    kind, exit_times = storage_transform_batch(
        arrivals[at_memory], classes[at_memory], cfg.comb, prepared, u_mem[at_memory])

    shutter_on = round(cfg.shutter_period_ps * cfg.shutter_duty)
    shutter = periodic_on_intervals(cfg.shutter_period_ps, shutter_on, duration)
    signal_gate = duty.intersect(shutter)
    p_post = cfg.post_losses.product() * cfg.det_signal.efficiency

    survived = kind != ABSORBED
    clicked = survived & (u_det[at_memory] < p_post) & signal_gate.contains(exit_times)
    diag.n_signal_clicks_echoed = int(np.sum(clicked & (kind == ECHOED)))
    diag.n_signal_clicks_transmitted = int(np.sum(clicked & (kind == TRANSMITTED)))

    n_clicked = keep_noise & (un_det < p_post) & signal_gate.contains(noise_times)
    diag.n_signal_clicks_noise = int(np.sum(n_clicked))

    photon_times = np.concatenate([exit_times[clicked], noise_times[n_clicked]])
    dark_signal = dark_clicks(cfg.det_signal, signal_gate, streams.stream("dark.signal"))
    diag.n_signal_darks = int(dark_signal.size)
    signal_clicks = merge_clicks(np.sort(photon_times), dark_signal)

    return PassResult(label=label, prepared=prepared, duration_ps=duration,
                      idler=idler_clicks, signal=signal_clicks,
                      off_schedule=off, diagnostics=diag)


def simulate_run(cfg, seed: int | None = None) -> tuple[PassResult, PassResult]:
    """Transparency-window pass and comb-written pass over shared streams."""
    input_pass = simulate_pass(cfg, prepared=False, label=INPUT_PASS, seed=seed)
    echo_pass = simulate_pass(cfg, prepared=True, label=ECHO_PASS, seed=seed)
    return input_pass, echo_pass


# ---------------------------------------------------------------------------
# run-level analysis

@dataclass
class PassAnalysis:
    label: str
    histogram: CorrelationHistogram
    g2: CorrelationResult
    n_heralds: int
    n_signal: int
    herald_rate_hz: float
    signal_rate_hz: float
    net_window_counts: float
    net_window_err: float


@dataclass
class RunAnalysis:
    input_pass: PassAnalysis
    echo_pass: PassAnalysis
    storage_time_ps: int
    pump_power_mw: float
    duration_ps: int
    efficiency_observed: float
    efficiency_err: float
    efficiency_analytic: float
    efficiency_numeric: float
    heralding_raw: float
    heralding_dark_corrected: float
    heralding_source_plane: float
    coincidence_detected_hz_per_mw: float
    coincidence_generated_hz_per_mw: float
    auto_signal: CorrelationResult
    auto_idler: CorrelationResult
    cs_ratio: float
    cs_ratio_err: float
    cs_ratio_model: float
    auto_theory: float
    g2_input_predicted: float | None
    metrics: dict[str, float] = field(default_factory=dict)


def _analyze_pass(cfg, idler_times: np.ndarray, signal_times: np.ndarray,
                  duration_ps: int, center_ps: int, floor_side: str,
                  label: str) -> PassAnalysis:
    ana = cfg.analysis
    max_delay = cfg.storage_time_ps + ana.delay_margin_ps
    hist = cross_correlation_histogram(idler_times, signal_times,
                                       ana.bin_width_ps, ana.delay_min_ps, max_delay)
    noise_windows = default_noise_windows(center_ps, ana.window_ps,
                                          ana.noise_offset_ps, ana.noise_width_ps,
                                          floor_side)
    g2 = g2_windowed(hist, center_ps, ana.window_ps, noise_windows,
                     duration_ps=duration_ps)
    dur_s = duration_ps / PS_PER_S
    net = g2.n_window - g2.floor_per_window
    # variance: Poisson window + scaled Poisson floor estimate
    scale = g2.floor_per_window / g2.n_floor if g2.n_floor else 0.0
    net_err = math.sqrt(g2.n_window + scale * g2.floor_per_window)
    return PassAnalysis(label=label, histogram=hist, g2=g2,
                        n_heralds=int(idler_times.size), n_signal=int(signal_times.size),
                        herald_rate_hz=idler_times.size / dur_s,
                        signal_rate_hz=signal_times.size / dur_s,
                        net_window_counts=net, net_window_err=net_err)


def analyze_run(cfg, input_streams: dict[int, np.ndarray],
                echo_streams: dict[int, np.ndarray],
                duration_ps: int | None = None) -> RunAnalysis:
    """Full coincidence analysis from click times alone.

    Takes {channel: times} dicts as produced by a simulation pass or read back
    from timestamp files, so simulate+analyze and analyze-from-files follow
    the identical code path. The virtual-splitter randomness is seeded from
    the run seed, keeping the two paths bit-identical.
    """
    duration = cfg.duration_ps if duration_ps is None else duration_ps
    ana = cfg.analysis
    tau = cfg.storage_time_ps

    inp = _analyze_pass(cfg, input_streams[IDLER_CHANNEL], input_streams[SIGNAL_CHANNEL],
                        duration, 0, "below", INPUT_PASS)
    ech = _analyze_pass(cfg, echo_streams[IDLER_CHANNEL], echo_streams[SIGNAL_CHANNEL],
                        duration, tau, "above", ECHO_PASS)

    # storage efficiency from net coincidence counts; transparency-window
    # transmission rescales the reference to unit input
    eff_analytic = afc_efficiency_analytic(cfg.comb)
    eff_numeric = afc_efficiency_numeric(cfg.comb)
    if inp.net_window_counts > 0:
        ratio = ech.net_window_counts / inp.net_window_counts
        eff_obs = cfg.comb.pit_transmission * ratio
        eff_err = eff_obs * math.sqrt(
            (ech.net_window_err / ech.net_window_counts) ** 2
            + (inp.net_window_err / inp.net_window_counts) ** 2) if ech.net_window_counts > 0 else math.nan
    else:
        eff_obs = math.nan
        eff_err = math.nan

    budget = cfg.budget()
    # darks fire only while the idler detector is gated on, so their
    # wall-clock herald rate carries the source duty factor
    dark_wall_hz = cfg.det_idler.dark_rate_hz * cfg.source.duty_fraction
    herald = heralding_efficiency(inp.g2.p_si, inp.g2.p_i, budget,
                                  dark_wall_hz, ana.window_ps)

    dur_s = duration / PS_PER_S
    pump = cfg.source.pump_power_mw
    c_detected = max(inp.net_window_counts, 0.0) / dur_s / pump
    c_generated = c_detected / budget.detected_to_generated()

    streams = RandomStreams(cfg.seed)
    auto_signal, _ = autocorrelation_g2(
        input_streams[SIGNAL_CHANNEL], streams.stream("analysis.split.signal"),
        ana.bin_width_ps, ana.window_ps, ana.auto_range_ps,
        ana.noise_offset_ps, ana.noise_width_ps)
    auto_idler, _ = autocorrelation_g2(
        input_streams[IDLER_CHANNEL], streams.stream("analysis.split.idler"),
        ana.bin_width_ps, ana.window_ps, ana.auto_range_ps,
        ana.noise_offset_ps, ana.noise_width_ps)

    cs, cs_err = cauchy_schwarz_ratio(inp.g2.g2, auto_signal.g2, auto_idler.g2,
                                      errs=(inp.g2.g2_err, auto_signal.g2_err,
                                            auto_idler.g2_err))
    auto_theory = g2_auto_theory(ana.noise_to_signal_a, ana.noise_to_signal_b,
                                 coherence_time_ps=ana.coherence_time_ps,
                                 window_ps=ana.window_ps,
                                 form=ana.auto_window_form)
    cs_model, _ = cauchy_schwarz_ratio(inp.g2.g2, auto_theory, auto_theory)

    predicted = None
    if ana.noise_ratio is not None:
        predicted = g2_input_prediction(ech.g2.g2, ana.noise_ratio)

    run = RunAnalysis(
        input_pass=inp, echo_pass=ech, storage_time_ps=tau,
        pump_power_mw=pump, duration_ps=duration,
        efficiency_observed=eff_obs, efficiency_err=eff_err,
        efficiency_analytic=eff_analytic, efficiency_numeric=eff_numeric,
        heralding_raw=herald.raw, heralding_dark_corrected=herald.dark_corrected,
        heralding_source_plane=herald.source_plane,
        coincidence_detected_hz_per_mw=c_detected,
        coincidence_generated_hz_per_mw=c_generated,
        auto_signal=auto_signal, auto_idler=auto_idler,
        cs_ratio=cs, cs_ratio_err=cs_err, cs_ratio_model=cs_model,
        auto_theory=auto_theory, g2_input_predicted=predicted,
    )
    run.metrics = _collect_metrics(run)
    return run


def _collect_metrics(run: RunAnalysis) -> dict[str, float]:
    m: dict[str, float] = {
        "duration_s": run.duration_ps / PS_PER_S,
        "pump_power_mw": run.pump_power_mw,
        "storage_time_ns": run.storage_time_ps / 1_000,
    }
    for p in (run.input_pass, run.echo_pass):
        m[f"{p.label}.heralds"] = float(p.n_heralds)
        m[f"{p.label}.signal_clicks"] = float(p.n_signal)
        m[f"{p.label}.herald_rate_hz"] = p.herald_rate_hz
        m[f"{p.label}.signal_rate_hz"] = p.signal_rate_hz
        m[f"{p.label}.g2"] = p.g2.g2
        m[f"{p.label}.g2_err"] = p.g2.g2_err
        m[f"{p.label}.window_counts"] = float(p.g2.n_window)
        m[f"{p.label}.floor_counts"] = float(p.g2.n_floor)
        m[f"{p.label}.net_window_counts"] = p.net_window_counts
        m[f"{p.label}.p_si"] = p.g2.p_si
        m[f"{p.label}.p_i"] = p.g2.p_i
        m[f"{p.label}.visibility"] = visibility_from_g2(p.g2.g2)
    m["efficiency.observed"] = run.efficiency_observed
    m["efficiency.err"] = run.efficiency_err
    m["efficiency.analytic"] = run.efficiency_analytic
    m["efficiency.numeric"] = run.efficiency_numeric
    m["heralding.raw"] = run.heralding_raw
    m["heralding.dark_corrected"] = run.heralding_dark_corrected
    m["heralding.source_plane"] = run.heralding_source_plane
    m["coincidence.detected_hz_per_mw"] = run.coincidence_detected_hz_per_mw
    m["coincidence.generated_hz_per_mw"] = run.coincidence_generated_hz_per_mw
    m["auto.signal_g2"] = run.auto_signal.g2
    m["auto.idler_g2"] = run.auto_idler.g2
    m["auto.theory"] = run.auto_theory
    m["cauchy_schwarz.observed"] = run.cs_ratio
    m["cauchy_schwarz.err"] = run.cs_ratio_err
    m["cauchy_schwarz.model"] = run.cs_ratio_model
    if run.g2_input_predicted is not None:
        m["input.g2_predicted_from_echo"] = run.g2_input_predicted
    return m


# ---------------------------------------------------------------------------
# config variations for sweeps

def with_pump_power(cfg, pump_mw: float):
    if pump_mw <= 0:
        raise ValueError("pump power must be positive")
    return replace(cfg, source=replace(cfg.source, pump_power_mw=float(pump_mw)))


def with_storage_time(cfg, storage_time_ps: int):
    if storage_time_ps % cfg.analysis.bin_width_ps:
        raise ValueError("storage time must align with the analysis bin width")
    comb = comb_from_storage_time(
        storage_time_ps, cfg.comb.tooth_width_khz, cfg.comb.peak_depth,
        cfg.comb.background_depth, cfg.comb.full_od, shape=cfg.comb.shape,
        total_width_mhz=cfg.comb.total_width_mhz,
        pit_transmission=cfg.comb.pit_transmission)
    return replace(cfg, storage_time_ps=int(storage_time_ps), comb=comb)


def with_noise_ratio(cfg, noise_ratio: float):
    return replace(cfg, analysis=replace(cfg.analysis, noise_ratio=float(noise_ratio)))


def without_filter_cavity(cfg):
    """Disable idler mode selectivity; the cavity's broadband insertion loss
    row stays in place, so main-cluster modes pass it flat."""
    return replace(cfg, idler_chain=replace(cfg.idler_chain, mode_selective=False))

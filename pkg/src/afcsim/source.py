"""Photon-pair source: Poisson pair emissions with discrete spectral modes and
a two-sided-exponential signal-idler delay, broadband signal-arm noise, the
chopper duty schedule and the herald-driven pump gate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (CLUSTER_SPACING_MHZ, MODE_SPACING_MHZ, Intervals,
                   RandomStreams, SpectralMode, mode_table,
                   periodic_on_intervals)
from .units import PS_PER_S, ms, ns, us

GENERATION_SLICE_PS = PS_PER_S  # 1 s slices; fixed so partitioning is reproducible


@dataclass(frozen=True)
class SourceParams:
    pump_power_mw: float
    pair_rate_per_mw_hz: float           # pair emissions per second per mW
    noise_rate_per_mw_hz: float = 0.0    # broadband noise, signal arm only
    correlation_decay_ps: int = ns(108)
    decay_convention: str = "one_over_e"  # or "fwhm"
    resonant_mode_index: int = 1
    cluster_spacing_mhz: float = CLUSTER_SPACING_MHZ
    mode_spacing_mhz: float = MODE_SPACING_MHZ
    duty_fraction: float = 0.45
    duty_period_ps: int = ms(20)
    gate_lead_ps: int = ns(500)
    gate_hold_ps: int = us(20)
    signal_escape: float = 1.0           # P(signal partner leaves the source | pair)

    def __post_init__(self):
        if self.pump_power_mw < 0 or self.pair_rate_per_mw_hz < 0 or self.noise_rate_per_mw_hz < 0:
            raise ValueError("rates and power must be non-negative")
        if self.correlation_decay_ps <= 0:
            raise ValueError("correlation decay must be positive")
        if self.decay_convention not in ("one_over_e", "fwhm"):
            raise ValueError("decay_convention must be 'one_over_e' or 'fwhm'")
        if not 0 < self.duty_fraction <= 1:
            raise ValueError("duty fraction must be in (0, 1]")
        if self.duty_period_ps <= 0 or self.gate_hold_ps <= 0 or self.gate_lead_ps < 0:
            raise ValueError("gate/duty times out of range")
        if not 0 <= self.signal_escape <= 1:
            raise ValueError("signal_escape must be in [0, 1]")

    @property
    def laplace_scale_ps(self) -> float:
        if self.decay_convention == "one_over_e":
            return float(self.correlation_decay_ps)
        return self.correlation_decay_ps / (2.0 * math.log(2.0))

    def modes(self) -> tuple[SpectralMode, ...]:
        return mode_table(self.resonant_mode_index, self.cluster_spacing_mhz,
                          self.mode_spacing_mhz)

    def duty_intervals(self, duration_ps: int) -> Intervals:
        on_ps = round(self.duty_period_ps * self.duty_fraction)
        return periodic_on_intervals(self.duty_period_ps, on_ps, duration_ps)


@dataclass
class PairBatch:
    """Candidate pair emissions, time-sorted. `delta_ps` is signal minus idler."""

    times_ps: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    mode_idx: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    delta_ps: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.times_ps.size)

    @staticmethod
    def concatenate(batches: list["PairBatch"]) -> "PairBatch":
        return PairBatch(
            np.concatenate([b.times_ps for b in batches]) if batches else np.empty(0, np.int64),
            np.concatenate([b.mode_idx for b in batches]) if batches else np.empty(0, np.int64),
            np.concatenate([b.delta_ps for b in batches]) if batches else np.empty(0, np.int64),
        )


def _poisson_times_in_slice(rate_hz: float, lo_ps: int, hi_ps: int,
                            rng: np.random.Generator) -> np.ndarray:
    mean = rate_hz * (hi_ps - lo_ps) / PS_PER_S
    n = rng.poisson(mean)
    return np.sort(rng.integers(lo_ps, hi_ps, size=n, dtype=np.int64))


def sample_pair_emissions(params: SourceParams, duration_ps: int,
                          streams: RandomStreams,
                          duty: Intervals | None = None) -> PairBatch:
    """Candidate pair emissions during duty-on periods.

    The run is partitioned into fixed 1 s slices with per-slice substreams, so
    generating [0, T) in one call or as adjacent sub-ranges yields identical
    events. Pump gating (herald feedback) is applied downstream.
    """
    rate = params.pump_power_mw * params.pair_rate_per_mw_hz
    if duty is None:
        duty = params.duty_intervals(duration_ps)
    batches = []
    for k, lo, hi in _slices(duration_ps):
        rng = streams.slice_stream("source.pairs", k)
        times = _poisson_times_in_slice(rate, lo, hi, rng)
        modes = rng.integers(0, len(params.modes()), size=times.size, dtype=np.int64)
        deltas = np.rint(rng.laplace(0.0, params.laplace_scale_ps, size=times.size)).astype(np.int64)
        batches.append(PairBatch(times, modes, deltas))
    batch = PairBatch.concatenate(batches)
    keep = duty.contains(batch.times_ps)
    return PairBatch(batch.times_ps[keep], batch.mode_idx[keep], batch.delta_ps[keep])


def sample_broadband_noise(params: SourceParams, duration_ps: int,
                           streams: RandomStreams,
                           duty: Intervals | None = None,
                           rate_scale: float = 1.0) -> np.ndarray:
    """Candidate broadband-noise emission times (signal arm), duty-restricted.

    `rate_scale` lets the caller fold downstream Bernoulli survival factors
    into the Poisson rate (thinning a Poisson process is exact), which avoids
    generating millions of emissions that would be absorbed anyway.
    """
    rate = params.pump_power_mw * params.noise_rate_per_mw_hz * rate_scale
    if duty is None:
        duty = params.duty_intervals(duration_ps)
    chunks = []
    for k, lo, hi in _slices(duration_ps):
        rng = streams.slice_stream("source.noise", k)
        chunks.append(_poisson_times_in_slice(rate, lo, hi, rng))
    times = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    return times[duty.contains(times)]


def _slices(duration_ps: int):
    k = 0
    lo = 0
    while lo < duration_ps:
        hi = min(lo + GENERATION_SLICE_PS, duration_ps)
        yield k, lo, hi
        k += 1
        lo = hi


def gate_off_window(herald_ps: int, storage_time_ps: int,
                    params: SourceParams) -> tuple[int, int]:
    """Pump-off interval for one herald: starts lead-time before the echo is
    due (clamped at the herald itself) and lasts for the hold time."""
    start = herald_ps + max(storage_time_ps - params.gate_lead_ps, 0)
    return start, start + params.gate_hold_ps


def build_gate_schedule(herald_times_ps, storage_time_ps: int,
                        params: SourceParams) -> Intervals:
    """Merged pump-off intervals for a set of heralds."""
    pairs = [gate_off_window(int(t), storage_time_ps, params) for t in herald_times_ps]
    if not pairs:
        return Intervals()
    return Intervals.from_pairs(pairs)

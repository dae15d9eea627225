"""Coincidence analysis: start-gated correlation histograms (mergeable for
parallel accumulation), windowed g2 with a sideband-estimated accidental
floor, auto-correlations via a virtual 50/50 splitter, the Cauchy-Schwarz
ratio, efficiency bookkeeping and the background/dichroism models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import DichroismModel
from .units import PS_PER_S


class AnalysisError(ValueError):
    """Raised for inconsistent binning/windows or an empty accidental floor."""


# ---------------------------------------------------------------------------
# correlation histogram

@dataclass
class CorrelationHistogram:
    """Counts of (stop - start) delays in half-open bins on the ps grid.

    Bin k covers [min_delay + k*w, min_delay + (k+1)*w). Histograms built from
    time-partitioned start streams against a shared stop stream add exactly,
    which is what `merge` implements.
    """

    bin_width_ps: int
    min_delay_ps: int
    counts: np.ndarray
    n_start: int
    n_stop: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.bin_width_ps <= 0:
            raise AnalysisError("bin width must be positive")

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)

    @property
    def max_delay_ps(self) -> int:
        return self.min_delay_ps + self.n_bins * self.bin_width_ps

    @property
    def bin_starts_ps(self) -> np.ndarray:
        return self.min_delay_ps + self.bin_width_ps * np.arange(self.n_bins, dtype=np.int64)

    def window_slice(self, lo_ps: int, hi_ps: int) -> slice:
        if not (self.min_delay_ps <= lo_ps < hi_ps <= self.max_delay_ps):
            raise AnalysisError(f"window [{lo_ps}, {hi_ps}) outside histogram range")
        if (lo_ps - self.min_delay_ps) % self.bin_width_ps or (hi_ps - lo_ps) % self.bin_width_ps:
            raise AnalysisError("window edges must align with the bin grid")
        a = (lo_ps - self.min_delay_ps) // self.bin_width_ps
        return slice(a, a + (hi_ps - lo_ps) // self.bin_width_ps)

    def window_counts(self, lo_ps: int, hi_ps: int) -> int:
        return int(self.counts[self.window_slice(lo_ps, hi_ps)].sum())

    def merge(self, other: "CorrelationHistogram") -> "CorrelationHistogram":
        if (self.bin_width_ps, self.min_delay_ps, self.n_bins) != \
           (other.bin_width_ps, other.min_delay_ps, other.n_bins):
            raise AnalysisError("cannot merge histograms with different binning")
        if self.n_stop != other.n_stop:
            raise AnalysisError("merge expects partitioned starts over a shared stop stream")
        return CorrelationHistogram(self.bin_width_ps, self.min_delay_ps,
                                    self.counts + other.counts,
                                    self.n_start + other.n_start, self.n_stop)

    def __add__(self, other: "CorrelationHistogram") -> "CorrelationHistogram":
        return self.merge(other)


def cross_correlation_histogram(start_times: np.ndarray, stop_times: np.ndarray,
                                bin_width_ps: int, min_delay_ps: int,
                                max_delay_ps: int) -> CorrelationHistogram:
    """Histogram every stop within [start+min, start+max) of each start."""
    if bin_width_ps <= 0:
        raise AnalysisError("bin width must be positive")
    if max_delay_ps <= min_delay_ps:
        raise AnalysisError("max delay must exceed min delay")
    if (max_delay_ps - min_delay_ps) % bin_width_ps:
        raise AnalysisError("bin width must divide the delay range")
    starts = np.asarray(start_times, dtype=np.int64)
    stops = np.asarray(stop_times, dtype=np.int64)
    n_bins = (max_delay_ps - min_delay_ps) // bin_width_ps
    lo = np.searchsorted(stops, starts + min_delay_ps, side="left")
    hi = np.searchsorted(stops, starts + max_delay_ps, side="left")
    lengths = hi - lo
    total = int(lengths.sum())
    counts = np.zeros(n_bins, dtype=np.int64)
    if total:
        rep_starts = np.repeat(starts, lengths)
        offsets = np.arange(total) - np.repeat(np.cumsum(lengths) - lengths, lengths)
        delays = stops[np.repeat(lo, lengths) + offsets] - rep_starts
        counts = np.bincount((delays - min_delay_ps) // bin_width_ps,
                             minlength=n_bins).astype(np.int64)
    return CorrelationHistogram(int(bin_width_ps), int(min_delay_ps), counts,
                                int(starts.size), int(stops.size))


# ---------------------------------------------------------------------------
# windowed g2 with sideband floor

@dataclass(frozen=True)
class CorrelationResult:
    g2: float
    g2_err: float
    n_window: int            # coincidences inside the detection window
    n_floor: int             # raw counts in the noise windows
    floor_per_window: float  # accidental estimate scaled to the window width
    center_ps: int
    window_ps: int
    p_si: float | None = None  # per-window-trial probabilities when duration known
    p_s: float | None = None
    p_i: float | None = None


def g2_windowed(hist: CorrelationHistogram, center_ps: int, window_ps: int,
                noise_windows, duration_ps: int | None = None) -> CorrelationResult:
    """g2 = window counts / accidental floor, floor taken from far-delay
    sideband windows of the same histogram (robust against duty cycles).

    Error bars assume Poissonian counting in both regions:
    sigma/g2 = sqrt(1/N_window + 1/N_floor).
    """
    if window_ps <= 0 or window_ps % hist.bin_width_ps:
        raise AnalysisError("window must be a positive multiple of the bin width")
    lo = center_ps - window_ps // 2
    n_window = hist.window_counts(lo, lo + window_ps)
    n_floor = 0
    floor_span = 0
    for a, b in noise_windows:
        n_floor += hist.window_counts(int(a), int(b))
        floor_span += int(b) - int(a)
    if floor_span <= 0:
        raise AnalysisError("need at least one non-empty noise window")
    floor_per_window = n_floor * (window_ps / floor_span)
    if n_floor == 0:
        # clean runs (no darks, no broadband noise) can have an empty floor;
        # report an unbounded g2 rather than failing the whole analysis
        g2 = math.inf if n_window > 0 else math.nan
        err = math.nan
    else:
        g2 = n_window / floor_per_window
        if n_window > 0:
            err = g2 * math.sqrt(1.0 / n_window + 1.0 / n_floor)
        else:
            err = 1.0 / floor_per_window  # one-count scale when the window is empty
    p_si = p_s = p_i = None
    if duration_ps is not None:
        trials = duration_ps / window_ps
        p_si = n_window / trials
        p_s = hist.n_stop / trials
        p_i = hist.n_start / trials
    return CorrelationResult(g2, err, n_window, n_floor, floor_per_window,
                             int(center_ps), int(window_ps), p_si, p_s, p_i)


def default_noise_windows(center_ps: int, window_ps: int, offset_ps: int,
                          width_ps: int, side: str):
    """Sideband windows flanking the detection window.

    side='below' puts the floor at earlier delays (pre-herald region, clean for
    the input window), 'above' at later delays (post-echo region, same pump
    state as the echo window), 'both' uses both flanks.
    """
    below = (center_ps - offset_ps - width_ps, center_ps - offset_ps)
    above = (center_ps + offset_ps, center_ps + offset_ps + width_ps)
    if side == "below":
        return [below]
    if side == "above":
        return [above]
    if side == "both":
        return [below, above]
    raise AnalysisError("noise window side must be 'below', 'above' or 'both'")


def autocorrelation_g2(times_ps: np.ndarray, rng: np.random.Generator,
                       bin_width_ps: int, window_ps: int, range_ps: int,
                       noise_offset_ps: int, noise_width_ps: int):
    """Unheralded auto-correlation through a virtual 50/50 splitter.

    The stream is split into two substreams and cross-correlated symmetrically
    around zero delay; the floor comes from both flanks. Returns
    (CorrelationResult, CorrelationHistogram).
    """
    times_ps = np.asarray(times_ps, dtype=np.int64)
    to_a = rng.random(times_ps.size) < 0.5
    hist = cross_correlation_histogram(times_ps[to_a], times_ps[~to_a],
                                       bin_width_ps, -range_ps, range_ps)
    noise = default_noise_windows(0, window_ps, noise_offset_ps, noise_width_ps, "both")
    return g2_windowed(hist, 0, window_ps, noise), hist


def cauchy_schwarz_ratio(g2_si: float, g2_ss: float, g2_ii: float,
                         errs: tuple[float, float, float] | None = None):
    """R = g2_si^2 / (g2_ss * g2_ii); classical fields obey R <= 1."""
    denom = g2_ss * g2_ii
    if denom == 0:
        r = math.inf if g2_si > 0 else math.nan
    else:
        r = g2_si ** 2 / denom
    if errs is None:
        return r, None
    if not all(math.isfinite(g) and g > 0 for g in (g2_si, g2_ss, g2_ii)):
        # degenerate inputs (empty-window correlations reported as 0, empty
        # floors reported as inf) admit no first-order error propagation
        return r, math.nan
    e_si, e_ss, e_ii = errs
    rel = math.sqrt(4 * (e_si / g2_si) ** 2 + (e_ss / g2_ss) ** 2 + (e_ii / g2_ii) ** 2)
    return r, r * rel


# ---------------------------------------------------------------------------
# efficiency bookkeeping

@dataclass(frozen=True)
class EfficiencyBudget:
    """Transmission/efficiency factors used to back-propagate detected rates."""

    eta_signal_chain: float    # source output -> cryostat entrance
    eta_idler_chain: float     # source output -> idler detector fiber
    eta_post: float            # cryostat exit -> signal detector, incl. shutter duty
    eta_det_signal: float
    eta_det_idler: float

    def detected_to_generated(self) -> float:
        return (self.eta_signal_chain * self.eta_idler_chain * self.eta_post
                * self.eta_det_signal * self.eta_det_idler)


@dataclass(frozen=True)
class HeraldingEfficiency:
    raw: float             # dark counts left in the herald stream
    dark_corrected: float  # dark heralds removed
    source_plane: float    # dark-corrected, back-propagated through the signal chain


def heralding_efficiency(p_si: float, p_i: float, budget: EfficiencyBudget,
                         idler_dark_rate_hz: float, window_ps: int) -> HeraldingEfficiency:
    """Probability that a herald has a signal partner at the cryostat entrance.

    p_si and p_i are per-window-trial probabilities; the detected ratio is
    corrected for the signal detector and post-memory losses. The dark
    correction removes dark_rate*window from the herald probability
    (idler_dark_rate_hz must be the wall-clock dark herald rate).
    """
    denom = budget.eta_det_signal * budget.eta_post
    if p_i <= 0:
        raise AnalysisError("empty herald stream")
    raw = p_si / (p_i * denom)
    p_dark = idler_dark_rate_hz * window_ps / PS_PER_S
    p_i_dc = p_i - p_dark
    if p_i_dc <= 0:
        raise AnalysisError("dark correction removed the entire herald probability")
    dark_corrected = p_si / (p_i_dc * denom)
    return HeraldingEfficiency(raw, dark_corrected,
                               dark_corrected / budget.eta_signal_chain)


def generated_rate(detected_coincidence_rate_hz: float, budget: EfficiencyBudget) -> float:
    """Back-propagate a detected coincidence rate to the source output."""
    return detected_coincidence_rate_hz / budget.detected_to_generated()


# ---------------------------------------------------------------------------
# background model for unheralded auto-correlations

def window_decay_factor(coherence_time_ps: float, window_ps: int) -> float:
    """Average of the two-sided-exponential correlation over a centered window."""
    x = window_ps / (2.0 * coherence_time_ps)
    return (1.0 / x) * (1.0 - math.exp(-x))


def g2_auto_theory(noise_to_signal_a: float, noise_to_signal_b: float,
                   coherence_time_ps: float | None = None,
                   window_ps: int | None = None, form: str = "excess") -> float:
    """Zero-delay auto-correlation of thermal light diluted by background.

    g(0) = 1 + (S_A/N_A)(S_B/N_B) with N = S + B per splitter arm. When a
    coherence time and detection window are given, the bunching excess is
    averaged over the window; `form="printed"` multiplies the full g(0) by the
    window factor instead (kept selectable because reported variants differ;
    only the excess form reproduces the reference windowed values).
    """
    g0 = 1.0 + 1.0 / ((1.0 + noise_to_signal_a) * (1.0 + noise_to_signal_b))
    if coherence_time_ps is None and window_ps is None:
        return g0
    if coherence_time_ps is None or window_ps is None:
        raise AnalysisError("need both coherence time and window for the windowed form")
    k = window_decay_factor(coherence_time_ps, window_ps)
    if form == "excess":
        return (g0 - 1.0) * k + 1.0
    if form == "printed":
        return g0 * k + 1.0
    raise AnalysisError("form must be 'excess' or 'printed'")


def visibility_from_g2(g2: float) -> float:
    """Interference visibility reachable with a heralded photon of given g2."""
    return (g2 - 1.0) / (g2 + 1.0)


def g2_input_prediction(g2_echo: float, noise_ratio: float) -> float:
    """Infer the input-photon g2 from the echo g2 and the non-resonant-to-
    resonant power ratio r: the memory filters out the non-resonant background,
    so the echo looks cleaner than the input by the bracketed factor."""
    if noise_ratio < 0:
        raise AnalysisError("noise ratio must be non-negative")
    if math.isinf(g2_echo):
        # background-free echo window; the prediction saturates at 1 + 1/r
        if noise_ratio == 0:
            return math.inf
        return (1.0 + noise_ratio) / noise_ratio
    return g2_echo * (1.0 + noise_ratio) / (1.0 + noise_ratio * g2_echo)


# ---------------------------------------------------------------------------
# dichroic absorption scans

@dataclass(frozen=True)
class DichroismFit:
    p_resonant: float
    p_nonresonant: float
    noise_ratio: float   # p_nonresonant / p_resonant
    visibility: float    # contrast between the two polarization axes


def dichroism_scan_model(model: DichroismModel, p_resonant: float,
                         noise_ratio: float, thetas_deg) -> np.ndarray:
    """Expected count level vs polarization angle: resonant part attenuated by
    the angle-dependent OD, non-resonant part unattenuated."""
    od = np.asarray(model.od_at(thetas_deg), dtype=float)
    return p_resonant * (np.exp(-od) + noise_ratio)


def synthesize_dichroism_scan(model: DichroismModel, p_resonant: float,
                              noise_ratio: float, thetas_deg,
                              rng: np.random.Generator | None = None) -> np.ndarray:
    mean = dichroism_scan_model(model, p_resonant, noise_ratio, thetas_deg)
    if rng is None:
        return mean
    return rng.poisson(mean).astype(float)


def fit_dichroism(thetas_deg, counts, model: DichroismModel) -> DichroismFit:
    """Least-squares fit of counts = P_nr + P_r * exp(-OD(theta))."""
    thetas = np.asarray(thetas_deg, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if thetas.size != counts.size or thetas.size < 3:
        raise AnalysisError("need at least 3 scan points")
    design = np.column_stack([np.exp(-model.od_at(thetas)), np.ones(thetas.size)])
    (p_r, p_nr), *_ = np.linalg.lstsq(design, counts, rcond=None)
    if p_r <= 0:
        raise AnalysisError("fit produced a non-positive resonant amplitude")
    ratio = p_nr / p_r
    return DichroismFit(float(p_r), float(p_nr), float(ratio),
                        visibility_for_ratio(model, float(ratio)))


def visibility_for_ratio(model: DichroismModel, noise_ratio: float) -> float:
    """Contrast (P_max - P_min)/(P_max + P_min) across the two axes."""
    a = math.exp(-model.od_d1)
    b = math.exp(-model.od_d2)
    return (a - b) / (2.0 * noise_ratio + a + b)


def ratio_for_visibility(model: DichroismModel, visibility: float) -> float:
    """Invert the contrast for the non-resonant-to-resonant ratio."""
    if not 0 < visibility <= 1:
        raise AnalysisError("visibility must be in (0, 1]")
    a = math.exp(-model.od_d1)
    b = math.exp(-model.od_d2)
    return ((a - b) - visibility * (a + b)) / (2.0 * visibility)

"""Coincidence analysis: histograms, windowed g2, derived statistics, fits."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afcsim.analysis import (
    AnalysisError,
    CorrelationHistogram,
    EfficiencyBudget,
    autocorrelation_g2,
    cauchy_schwarz_ratio,
    cross_correlation_histogram,
    default_noise_windows,
    fit_dichroism,
    g2_auto_theory,
    g2_input_prediction,
    g2_windowed,
    generated_rate,
    heralding_efficiency,
    ratio_for_visibility,
    synthesize_dichroism_scan,
    visibility_for_ratio,
    visibility_from_g2,
    window_decay_factor,
)
from afcsim.chain import DichroismModel
from afcsim.units import ns, us, seconds as s


def build_hist(starts, stops, bin_width=5000, lo=-3_000_000, hi=3_000_000):
    return cross_correlation_histogram(
        np.asarray(starts, dtype=np.int64), np.asarray(stops, dtype=np.int64),
        bin_width, lo, hi)


class TestHistogram:
    def test_single_coincidence_lands_in_zero_bin(self):
        h = build_hist([ns(100)], [ns(100)])
        assert h.counts.sum() == 1
        zero_bin = (0 - h.min_delay_ps) // h.bin_width_ps
        assert h.counts[zero_bin] == 1
        assert h.n_start == 1 and h.n_stop == 1

    def test_delay_sign_convention(self):
        # stop after start -> positive delay
        h = build_hist([0], [ns(100)])
        idx = h.counts.nonzero()[0]
        assert h.bin_starts_ps[idx] == ns(100)

    @given(st.lists(st.integers(0, 500), max_size=30),
           st.lists(st.integers(0, 500), max_size=30))
    @settings(max_examples=60)
    def test_matches_brute_force(self, starts, stops):
        starts = sorted(starts)
        stops = sorted(stops)
        h = cross_correlation_histogram(np.array(starts, dtype=np.int64),
                                        np.array(stops, dtype=np.int64),
                                        10, -200, 200)
        brute = np.zeros(h.n_bins, dtype=np.int64)
        for a in starts:
            for b in stops:
                d = b - a
                if -200 <= d < 200:
                    brute[(d + 200) // 10] += 1
        np.testing.assert_array_equal(h.counts, brute)

    def test_window_must_align_to_bins(self):
        h = build_hist([0], [0])
        with pytest.raises(AnalysisError):
            h.window_slice(0, 5001)

    def test_range_must_be_bin_multiple(self):
        with pytest.raises(AnalysisError):
            cross_correlation_histogram(np.array([0], dtype=np.int64),
                                        np.array([0], dtype=np.int64),
                                        5000, -2500, 7501)
        with pytest.raises(AnalysisError):
            cross_correlation_histogram(np.array([0], dtype=np.int64),
                                        np.array([0], dtype=np.int64),
                                        5000, 2_000_000, -2_000_000)


class TestMerge:
    def test_partitioned_starts_merge_exactly(self):
        rng = np.random.default_rng(8)
        starts = np.sort(rng.integers(0, s(1), 4000)).astype(np.int64)
        stops = np.sort(rng.integers(0, s(1), 3000)).astype(np.int64)
        whole = build_hist(starts, stops)
        cut = s(1) // 2
        first = build_hist(starts[starts < cut], stops)
        second = build_hist(starts[starts >= cut], stops)
        merged = first.merge(second)
        np.testing.assert_array_equal(merged.counts, whole.counts)
        assert merged.n_start == whole.n_start
        assert merged.n_stop == whole.n_stop

    def test_add_operator(self):
        a = build_hist([0], [0])
        b = build_hist([10], [10])
        both = a + b
        assert both.counts.sum() == 2

    def test_binning_mismatch_rejected(self):
        a = build_hist([0], [0], bin_width=5000)
        b = build_hist([0], [0], bin_width=10000)
        with pytest.raises(AnalysisError):
            a.merge(b)

    def test_stop_stream_mismatch_rejected(self):
        a = build_hist([0], [0, 10])
        b = build_hist([0], [0])
        with pytest.raises(AnalysisError):
            a.merge(b)


def crafted_hist():
    counts = np.zeros(1200, dtype=np.int64)
    counts[560:640] = 1            # 80 counts across [-200 ns, 200 ns)
    counts[320:420] = 1            # 100 counts across [-1.4 us, -0.9 us)
    return CorrelationHistogram(bin_width_ps=5000, min_delay_ps=-3_000_000,
                                counts=counts, n_start=1000, n_stop=1000)


class TestWindowedG2:
    WINDOWS = default_noise_windows(0, ns(400), ns(400), us(1), "below")

    def test_windows_placement(self):
        assert self.WINDOWS == [(-1_400_000, -400_000)]
        both = default_noise_windows(0, ns(400), ns(400), us(1), "both")
        assert both == [(-1_400_000, -400_000), (400_000, 1_400_000)]

    def test_exact_arithmetic(self):
        res = g2_windowed(crafted_hist(), 0, ns(400), self.WINDOWS)
        assert res.n_window == 80
        assert res.n_floor == 100
        assert res.floor_per_window == pytest.approx(40.0)
        assert res.g2 == pytest.approx(2.0)
        assert res.g2_err == pytest.approx(2.0 * math.sqrt(1 / 80 + 1 / 100))

    def test_empty_floor_is_flagged_infinite(self):
        counts = np.zeros(1200, dtype=np.int64)
        counts[560:640] = 2
        h = CorrelationHistogram(5000, -3_000_000, counts, 10, 10)
        res = g2_windowed(h, 0, ns(400), self.WINDOWS)
        assert math.isinf(res.g2)
        assert math.isnan(res.g2_err)

    def test_empty_window_keeps_floor_scale(self):
        counts = np.zeros(1200, dtype=np.int64)
        counts[320:420] = 2        # floor only
        h = CorrelationHistogram(5000, -3_000_000, counts, 10, 10)
        res = g2_windowed(h, 0, ns(400), self.WINDOWS)
        assert res.g2 == 0.0
        assert res.g2_err == pytest.approx(1 / res.floor_per_window)

    def test_per_trial_probabilities(self):
        res = g2_windowed(crafted_hist(), 0, ns(400), self.WINDOWS,
                          duration_ps=s(1))
        trials = s(1) / ns(400)
        assert res.p_si == pytest.approx(80 / trials)
        assert res.p_i == pytest.approx(1000 / trials)

    def test_independent_poisson_is_unity_over_many_seeds(self):
        # distributional check: z = (g2 - 1)/err should look standard normal
        zs = []
        outliers = 0
        rate = 50_000.0
        duration = s(1) // 5
        n = int(rate * duration / 1e12)
        windows = default_noise_windows(0, ns(400), ns(400), us(1), "both")
        for seed in range(120):
            rng = np.random.default_rng(seed)
            starts = np.sort(rng.integers(0, duration, n)).astype(np.int64)
            stops = np.sort(rng.integers(0, duration, n)).astype(np.int64)
            h = cross_correlation_histogram(starts, stops, 5000,
                                            -2_000_000, 2_000_000)
            res = g2_windowed(h, 0, ns(400), windows)
            z = (res.g2 - 1.0) / res.g2_err
            zs.append(z)
            if abs(z) > 3:
                outliers += 1
        assert outliers <= 3
        assert abs(np.mean(zs)) < 3 / math.sqrt(len(zs)) + 0.1

    def test_accidental_floor_mean(self):
        # flat coincidence background: rate1 * rate2 * duration * bin_width
        r1, r2 = 20_000.0, 30_000.0
        duration = s(1)
        rng = np.random.default_rng(77)
        starts = np.sort(rng.integers(0, duration, int(r1))).astype(np.int64)
        stops = np.sort(rng.integers(0, duration, int(r2))).astype(np.int64)
        h = build_hist(starts, stops)
        expect_per_bin = r1 * r2 * 1.0 * (5000 / 1e12)
        inner = h.counts[100:-100]
        assert abs(inner.mean() - expect_per_bin) < 5 * math.sqrt(
            expect_per_bin / inner.size)

    def test_echo_peak_position(self):
        rng = np.random.default_rng(9)
        heralds = np.sort(rng.integers(0, s(1), 5000)).astype(np.int64)
        echoes = heralds + us(2)
        h = build_hist(heralds, echoes)
        peak = h.bin_starts_ps[h.counts.argmax()]
        assert peak == us(2)


class TestAutocorrelation:
    def test_poisson_split_is_unity(self):
        rng = np.random.default_rng(11)
        times = np.sort(rng.integers(0, s(2), 120_000)).astype(np.int64)
        res, hist = autocorrelation_g2(times, np.random.default_rng(12),
                                       bin_width_ps=5000, window_ps=ns(400),
                                       range_ps=us(2), noise_offset_ps=ns(400),
                                       noise_width_ps=us(1))
        assert abs(res.g2 - 1.0) < 3 * res.g2_err
        # split conserves events
        assert hist.n_start + hist.n_stop == times.size


class TestCauchySchwarz:
    def test_value(self):
        r, err = cauchy_schwarz_ratio(8.7, 1.14, 1.07, errs=(0.2, 0.02, 0.01))
        assert r == pytest.approx(8.7 ** 2 / (1.14 * 1.07))
        expect_rel = math.sqrt((2 * 0.2 / 8.7) ** 2 + (0.02 / 1.14) ** 2
                               + (0.01 / 1.07) ** 2)
        assert err == pytest.approx(r * expect_rel)

    def test_classical_boundary_is_unity(self):
        # thermal light saturates the bound: g_si^2 = g_ss * g_ii
        r, err = cauchy_schwarz_ratio(2.0, 2.0, 2.0)
        assert r == pytest.approx(1.0)
        assert err is None

    def test_degenerate_correlations_do_not_raise(self):
        # short runs can report a 0 auto-correlation (empty window over a
        # nonzero floor) or an inf cross-correlation (empty floor); the ratio
        # must degrade to inf/nan instead of crashing the error propagation
        r, err = cauchy_schwarz_ratio(10.0, 2.0, 0.0, errs=(1.0, 0.1, 2.5))
        assert math.isinf(r) and math.isnan(err)
        r, err = cauchy_schwarz_ratio(0.0, 0.0, 0.0, errs=(1.0, 1.0, 1.0))
        assert math.isnan(r) and math.isnan(err)
        r, err = cauchy_schwarz_ratio(math.inf, 2.0, 2.0,
                                      errs=(math.nan, 0.1, 0.1))
        assert math.isinf(r) and math.isnan(err)
        r, err = cauchy_schwarz_ratio(0.0, 2.0, 2.0, errs=(0.5, 0.1, 0.1))
        assert r == 0.0 and math.isnan(err)


class TestTheoryCurves:
    def test_auto_zero_delay(self):
        assert g2_auto_theory(0.85, 0.98) == pytest.approx(1.273, abs=5e-4)
        # background-free single-mode thermal light
        assert g2_auto_theory(0.0, 0.0) == pytest.approx(2.0)

    def test_windowed_forms(self):
        g = g2_auto_theory(0.85, 0.98, coherence_time_ps=ns(265),
                           window_ps=ns(400))
        assert g == pytest.approx(1.192, abs=5e-4)
        printed = g2_auto_theory(0.85, 0.98, coherence_time_ps=ns(265),
                                 window_ps=ns(400), form="printed")
        assert printed > g
        with pytest.raises(AnalysisError):
            g2_auto_theory(0.85, 0.98, coherence_time_ps=ns(265))
        with pytest.raises(AnalysisError):
            g2_auto_theory(0.85, 0.98, coherence_time_ps=ns(265),
                           window_ps=ns(400), form="other")

    def test_window_decay_factor(self):
        assert window_decay_factor(ns(265), ns(400)) == pytest.approx(0.7021, abs=1e-4)
        # narrow window keeps the full bunching excess
        assert window_decay_factor(ns(265), 10) == pytest.approx(1.0, abs=1e-4)
        assert window_decay_factor(ns(265), us(100)) < 0.01

    @given(st.floats(min_value=1.0, max_value=500.0))
    def test_visibility_bounds(self, g2):
        v = visibility_from_g2(g2)
        assert 0.0 <= v < 1.0

    def test_visibility_values(self):
        assert visibility_from_g2(1.0) == 0.0
        assert visibility_from_g2(3.0) == pytest.approx(0.5)
        assert visibility_from_g2(12.6) == pytest.approx(0.853, abs=5e-4)

    @given(st.floats(min_value=1.0, max_value=100.0),
           st.floats(min_value=0.0, max_value=0.5),
           st.floats(min_value=0.0, max_value=0.5))
    def test_prediction_monotone_in_noise(self, g2_echo, r1, r2):
        lo, hi = sorted((r1, r2))
        assert g2_input_prediction(g2_echo, hi) <= g2_input_prediction(g2_echo, lo) + 1e-12

    def test_prediction_values(self):
        assert g2_input_prediction(17.4, 0.021) == pytest.approx(13.0, abs=0.05)
        assert g2_input_prediction(15.0, 0.034) == pytest.approx(10.3, abs=0.05)
        assert g2_input_prediction(9.0, 0.0) == 9.0
        # background-free echo saturates at 1 + 1/r
        assert g2_input_prediction(math.inf, 0.02) == pytest.approx(51.0)
        assert math.isinf(g2_input_prediction(math.inf, 0.0))


class TestHeralding:
    BUDGET = EfficiencyBudget(eta_signal_chain=0.18, eta_idler_chain=0.22,
                              eta_post=0.225, eta_det_signal=0.32,
                              eta_det_idler=0.10)

    def test_generated_rate(self):
        assert generated_rate(0.83, self.BUDGET) == pytest.approx(2911.1, abs=0.5)

    def test_zero_dark_case(self):
        h = heralding_efficiency(p_si=0.01, p_i=0.1, budget=self.BUDGET,
                                 idler_dark_rate_hz=0.0, window_ps=ns(400))
        # herald referred to the memory output plane: divide out signal-side
        # detection and everything after the memory
        expect_raw = 0.01 / (0.1 * 0.32 * 0.225)
        assert h.raw == pytest.approx(expect_raw)
        assert h.dark_corrected == pytest.approx(expect_raw)
        assert h.source_plane == pytest.approx(h.dark_corrected / 0.18)

    def test_dark_correction_raises_efficiency(self):
        # p_dark = 1e5 Hz * 400 ns = 0.04 of the 0.1 herald probability
        h0 = heralding_efficiency(0.01, 0.1, self.BUDGET, 0.0, ns(400))
        h1 = heralding_efficiency(0.01, 0.1, self.BUDGET, 1e5, ns(400))
        assert h1.dark_corrected > h0.dark_corrected
        assert h1.dark_corrected == pytest.approx(h0.dark_corrected * 0.1 / 0.06)
        assert h1.raw == h0.raw

    def test_all_dark_heralds_rejected(self):
        with pytest.raises(AnalysisError):
            heralding_efficiency(0.01, 0.1, self.BUDGET,
                                 idler_dark_rate_hz=2.5e5, window_ps=ns(400))

    def test_empty_herald_stream_rejected(self):
        with pytest.raises(AnalysisError):
            heralding_efficiency(0.0, 0.0, self.BUDGET, 0.0, ns(400))


class TestDichroism:
    MODEL = DichroismModel(od_d1=1.4, od_d2=6.9)
    THETAS = np.arange(0.0, 91.0, 10.0)

    def test_noise_free_fit_is_exact(self):
        counts = synthesize_dichroism_scan(self.MODEL, 5e5, 0.02, self.THETAS)
        fit = fit_dichroism(self.THETAS, counts, self.MODEL)
        assert fit.noise_ratio == pytest.approx(0.02, rel=1e-9)
        assert fit.p_resonant == pytest.approx(5e5, rel=1e-9)

    def test_poisson_fit_recovers_ratio(self):
        rng = np.random.default_rng(42)
        counts = synthesize_dichroism_scan(self.MODEL, 1e6, 0.013, self.THETAS,
                                           rng=rng)
        fit = fit_dichroism(self.THETAS, counts, self.MODEL)
        assert fit.noise_ratio == pytest.approx(0.013, rel=0.10)

    def test_visibility_ratio_inverse_pair(self):
        for r in (0.005, 0.013, 0.05, 0.2):
            v = visibility_for_ratio(self.MODEL, r)
            assert ratio_for_visibility(self.MODEL, v) == pytest.approx(r, rel=1e-9)

    def test_clean_crystal_visibility(self):
        assert visibility_for_ratio(self.MODEL, 0.0) == pytest.approx(0.992, abs=5e-4)

    def test_visibility_decreases_with_noise(self):
        vs = [visibility_for_ratio(self.MODEL, r) for r in (0.0, 0.01, 0.1, 1.0)]
        assert vs == sorted(vs, reverse=True)

    def test_fit_needs_enough_points(self):
        with pytest.raises(AnalysisError):
            fit_dichroism(np.array([0.0, 90.0]), np.array([10.0, 5.0]), self.MODEL)

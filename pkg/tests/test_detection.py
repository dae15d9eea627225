"""Detector statistics and timestamp serialization round trips."""

import math
import struct

import numpy as np
import pytest

from afcsim.core import Intervals, RandomStreams
from afcsim.detection import (
    ClickStream,
    DetectorSpec,
    TimestampFormatError,
    dark_clicks,
    detect,
    merge_clicks,
    read_timestamps_binary,
    read_timestamps_csv,
    write_timestamps_binary,
    write_timestamps_csv,
)
from afcsim.units import seconds as s


class TestDetector:
    def test_efficiency_thins_arrivals(self):
        rng = np.random.default_rng(17)
        gate = Intervals.from_pairs([(0, s(1))])
        arrivals = np.sort(rng.integers(0, s(1), 100_000)).astype(np.int64)
        spec = DetectorSpec(efficiency=0.32)
        out = detect(arrivals, spec, gate, np.random.default_rng(1))
        expected = 32_000
        assert abs(out.times_ps.size - expected) < 5 * math.sqrt(expected)
        assert np.all(out.photon)

    def test_gate_drops_out_of_window_arrivals(self):
        gate = Intervals.from_pairs([(100, 200)])
        arrivals = np.array([50, 120, 150, 250], dtype=np.int64)
        out = detect(arrivals, DetectorSpec(efficiency=1.0), gate,
                     np.random.default_rng(2))
        np.testing.assert_array_equal(out.times_ps, [120, 150])

    def test_extra_transmission_multiplies(self):
        rng = np.random.default_rng(18)
        gate = Intervals.from_pairs([(0, s(1))])
        arrivals = np.sort(rng.integers(0, s(1), 200_000)).astype(np.int64)
        out = detect(arrivals, DetectorSpec(efficiency=0.5), gate,
                     np.random.default_rng(3), extra_transmission=0.5)
        expected = 50_000
        assert abs(out.times_ps.size - expected) < 5 * math.sqrt(expected)

    def test_dark_clicks_follow_gate(self):
        gate = Intervals.from_pairs([(0, s(1)), (s(2), s(3))])
        spec = DetectorSpec(efficiency=0.5, dark_rate_hz=1000.0)
        times = dark_clicks(spec, gate, np.random.default_rng(4))
        assert np.all(gate.contains(times))
        # rate applies to gated time only: 2 s of open gate
        assert abs(times.size - 2000) < 5 * math.sqrt(2000)
        assert np.all(np.diff(times) >= 0)

    def test_zero_dark_rate(self):
        gate = Intervals.from_pairs([(0, s(1))])
        spec = DetectorSpec(efficiency=0.5)
        assert dark_clicks(spec, gate, np.random.default_rng(5)).size == 0

    def test_merge_keeps_provenance(self):
        merged = merge_clicks(np.array([10, 30], dtype=np.int64),
                              np.array([20], dtype=np.int64))
        np.testing.assert_array_equal(merged.times_ps, [10, 20, 30])
        np.testing.assert_array_equal(merged.photon, [True, False, True])
        assert merged.n_photon == 2 and merged.n_dark == 1

    def test_dead_time_not_modeled(self):
        with pytest.raises(NotImplementedError):
            DetectorSpec(efficiency=0.5, dead_time_ps=1000)

    @pytest.mark.parametrize("eff", [-0.1, 1.5])
    def test_bad_efficiency(self, eff):
        with pytest.raises(ValueError):
            DetectorSpec(efficiency=eff)


def sample_streams():
    return {
        0: np.array([0, 5, 1_000_000_000], dtype=np.int64),
        1: np.array([3, 5, 7], dtype=np.int64),
    }


class TestCsvFormat:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.csv"
        write_timestamps_csv(path, sample_streams())
        back = read_timestamps_csv(path)
        assert set(back) == {0, 1}
        np.testing.assert_array_equal(back[0], sample_streams()[0])
        np.testing.assert_array_equal(back[1], sample_streams()[1])

    def test_round_trip_is_byte_stable(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        write_timestamps_csv(a, sample_streams())
        write_timestamps_csv(b, read_timestamps_csv(a))
        assert a.read_bytes() == b.read_bytes()

    def test_header_and_ordering(self, tmp_path):
        path = tmp_path / "t.csv"
        write_timestamps_csv(path, sample_streams())
        lines = path.read_text().splitlines()
        assert lines[0] == "channel,time_ps"
        times = [int(l.split(",")[1]) for l in lines[1:]]
        assert times == sorted(times)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time_ps,channel\n0,1\n")
        with pytest.raises(TimestampFormatError):
            read_timestamps_csv(path)

    @pytest.mark.parametrize("row", ["1", "a,5", "1,x", "1,-4", "300,5"])
    def test_rejects_malformed_rows(self, tmp_path, row):
        path = tmp_path / "bad.csv"
        path.write_text(f"channel,time_ps\n{row}\n")
        with pytest.raises(TimestampFormatError) as err:
            read_timestamps_csv(path)
        assert "2" in str(err.value)  # failing line number named

    def test_empty_file_is_empty_streams(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("channel,time_ps\n")
        assert read_timestamps_csv(path) == {}


class TestBinaryFormat:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.bin"
        write_timestamps_binary(path, sample_streams())
        back = read_timestamps_binary(path)
        np.testing.assert_array_equal(back[0], sample_streams()[0])
        np.testing.assert_array_equal(back[1], sample_streams()[1])

    def test_round_trip_is_byte_stable(self, tmp_path):
        a = tmp_path / "a.bin"
        b = tmp_path / "b.bin"
        write_timestamps_binary(a, sample_streams())
        write_timestamps_binary(b, read_timestamps_binary(a))
        assert a.read_bytes() == b.read_bytes()

    def test_record_layout(self, tmp_path):
        path = tmp_path / "t.bin"
        write_timestamps_binary(path, {7: np.array([513], dtype=np.int64)})
        raw = path.read_bytes()
        assert len(raw) == 16
        channel, time = struct.unpack("<B7xQ", raw)
        assert channel == 7 and time == 513
        assert raw[1:8] == b"\x00" * 7

    def test_truncated_file_names_offset(self, tmp_path):
        path = tmp_path / "t.bin"
        write_timestamps_binary(path, sample_streams())
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(TimestampFormatError) as err:
            read_timestamps_binary(path)
        assert "80" in str(err.value)

    def test_interleaving_sorted_by_time(self, tmp_path):
        path = tmp_path / "t.bin"
        write_timestamps_binary(path, sample_streams())
        raw = path.read_bytes()
        rows = [struct.unpack("<B7xQ", raw[i:i + 16]) for i in range(0, len(raw), 16)]
        times = [t for _, t in rows]
        assert times == sorted(times)
        # ties broken by channel for reproducible bytes
        assert rows[2][0] == 0 and rows[3][0] == 1  # both at t=5


class TestFormatInterop:
    def test_csv_and_binary_agree(self, tmp_path):
        streams = {
            0: np.sort(np.random.default_rng(6).integers(0, s(1), 500)).astype(np.int64),
            1: np.sort(np.random.default_rng(7).integers(0, s(1), 300)).astype(np.int64),
        }
        c = tmp_path / "t.csv"
        b = tmp_path / "t.bin"
        write_timestamps_csv(c, streams)
        write_timestamps_binary(b, streams)
        from_csv = read_timestamps_csv(c)
        from_bin = read_timestamps_binary(b)
        assert set(from_csv) == set(from_bin)
        for ch in from_csv:
            np.testing.assert_array_equal(from_csv[ch], from_bin[ch])

"""Detector front-end (efficiency thinning, gate windows, Poisson dark counts)
and the two timestamp interchange formats.

CSV: header `channel,time_ps`, one decimal-integer row per click. Binary:
headerless 16-byte records, byte 0 the channel, bytes 1-7 reserved zero,
bytes 8-15 the time as little-endian uint64 picoseconds.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Intervals
from .units import PS_PER_S

RECORD = struct.Struct("<B7xQ")


class TimestampFormatError(ValueError):
    """Malformed timestamp file (bad header, bad row, truncated record)."""


@dataclass(frozen=True)
class DetectorSpec:
    efficiency: float
    dark_rate_hz: float = 0.0
    dead_time_ps: int = 0  # extension hook; only 0 is implemented

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise ValueError("efficiency must be in [0, 1]")
        if self.dark_rate_hz < 0:
            raise ValueError("dark rate must be non-negative")
        if self.dead_time_ps != 0:
            raise NotImplementedError("detector dead time is not modeled")


@dataclass
class ClickStream:
    """Time-sorted detector clicks; `photon` distinguishes real from dark clicks."""

    times_ps: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    photon: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))

    def __post_init__(self):
        self.times_ps = np.asarray(self.times_ps, dtype=np.int64)
        self.photon = np.asarray(self.photon, dtype=bool)
        if self.times_ps.shape != self.photon.shape:
            raise ValueError("times and photon flags must align")
        if self.times_ps.size > 1 and np.any(np.diff(self.times_ps) < 0):
            raise ValueError("clicks must be time-sorted")

    def __len__(self) -> int:
        return int(self.times_ps.size)

    @property
    def n_photon(self) -> int:
        return int(np.count_nonzero(self.photon))

    @property
    def n_dark(self) -> int:
        return len(self) - self.n_photon


def dark_clicks(spec: DetectorSpec, gate: Intervals, rng: np.random.Generator) -> np.ndarray:
    """Poisson dark clicks accrued only while the gate is open."""
    open_ps = gate.total_ps()
    n = rng.poisson(spec.dark_rate_hz * open_ps / PS_PER_S) if open_ps > 0 else 0
    return gate.sample_uniform(int(n), rng)


def merge_clicks(photon_times: np.ndarray, dark_times: np.ndarray) -> ClickStream:
    times = np.concatenate([np.asarray(photon_times, dtype=np.int64),
                            np.asarray(dark_times, dtype=np.int64)])
    photon = np.concatenate([np.ones(len(photon_times), dtype=bool),
                             np.zeros(len(dark_times), dtype=bool)])
    order = np.argsort(times, kind="stable")
    return ClickStream(times[order], photon[order])


def detect(arrival_times: np.ndarray, spec: DetectorSpec, gate: Intervals,
           rng: np.random.Generator, extra_transmission: float = 1.0) -> ClickStream:
    """Thin arrivals by detection probability inside the gate and add darks.

    `extra_transmission` folds any passive losses between the last modeled
    element and the detector into the same Bernoulli draw.
    """
    arrival_times = np.asarray(arrival_times, dtype=np.int64)
    p = spec.efficiency * extra_transmission
    u = rng.random(arrival_times.size)
    keep = (u < p) & gate.contains(arrival_times)
    photon_times = np.sort(arrival_times[keep])
    return merge_clicks(photon_times, dark_clicks(spec, gate, rng))


# ---------------------------------------------------------------------------
# timestamp files

def write_timestamps_csv(path, channel_streams: dict[int, np.ndarray]) -> None:
    rows = _merged_rows(channel_streams)
    with open(path, "w", newline="") as fh:
        fh.write("channel,time_ps\n")
        for channel, t in rows:
            fh.write(f"{channel},{t}\n")


def read_timestamps_csv(path) -> dict[int, np.ndarray]:
    channels, times = [], []
    with open(path, "r") as fh:
        header = fh.readline().rstrip("\n")
        if header != "channel,time_ps":
            raise TimestampFormatError(f"{path}: expected header 'channel,time_ps', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise TimestampFormatError(f"{path}:{lineno}: expected 'channel,time_ps'")
            try:
                channel, t = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise TimestampFormatError(f"{path}:{lineno}: non-integer field") from exc
            if not 0 <= channel < 256:
                raise TimestampFormatError(f"{path}:{lineno}: channel must fit in one byte")
            if t < 0:
                raise TimestampFormatError(f"{path}:{lineno}: negative timestamp")
            channels.append(channel)
            times.append(t)
    return _split_channels(np.array(channels, dtype=np.uint8),
                           np.array(times, dtype=np.int64), str(path))


def write_timestamps_binary(path, channel_streams: dict[int, np.ndarray]) -> None:
    rows = _merged_rows(channel_streams)
    with open(path, "wb") as fh:
        for channel, t in rows:
            fh.write(RECORD.pack(channel, t))


def read_timestamps_binary(path) -> dict[int, np.ndarray]:
    data = Path(path).read_bytes()
    if len(data) % RECORD.size != 0:
        offset = len(data) - len(data) % RECORD.size
        raise TimestampFormatError(
            f"{path}: truncated record at byte {offset} (file size {len(data)} "
            f"is not a multiple of {RECORD.size})")
    raw = np.frombuffer(data, dtype=np.dtype([("channel", "u1"),
                                              ("reserved", "u1", (7,)),
                                              ("time", "<u8")]))
    times = raw["time"].astype(np.int64)
    return _split_channels(raw["channel"].copy(), times, str(path))


def _merged_rows(channel_streams: dict[int, np.ndarray]):
    """Flatten per-channel streams into (channel, time) rows sorted by time."""
    pairs = []
    for channel, times in channel_streams.items():
        if not 0 <= int(channel) < 256:
            raise ValueError("channel must fit in one byte")
        times = np.asarray(times, dtype=np.int64)
        if np.any(times < 0):
            raise ValueError("timestamps must be non-negative")
        pairs.append((np.full(times.size, channel, dtype=np.uint8), times))
    if not pairs:
        return []
    channels = np.concatenate([c for c, _ in pairs])
    times = np.concatenate([t for _, t in pairs])
    order = np.lexsort((channels, times))
    return list(zip(channels[order].tolist(), times[order].tolist()))


def _split_channels(channels: np.ndarray, times: np.ndarray, label: str) -> dict[int, np.ndarray]:
    if times.size > 1 and np.any(np.diff(times) < 0):
        warnings.warn(f"{label}: timestamps are not monotonically non-decreasing")
    out = {}
    for channel in np.unique(channels):
        sel = channels == channel
        out[int(channel)] = np.sort(times[sel])
    return out

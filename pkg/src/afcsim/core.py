"""Shared model primitives: spectral modes, photon events, named RNG streams
and half-open interval bookkeeping on the integer-ps time grid."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

CLUSTER_SPACING_MHZ = 44_500.0  # secondary spectral clusters sit at +-44.5 GHz
MODE_SPACING_MHZ = 412.0        # longitudinal mode spacing within a cluster
MODES_PER_CLUSTER = 4
CLUSTER_INDICES = (-1, 0, 1)

IDLER_CHANNEL = 0
SIGNAL_CHANNEL = 1


@dataclass(frozen=True)
class SpectralMode:
    """One of the discrete emission modes (3 clusters x 4 longitudinal modes)."""

    cluster_index: int          # -1, 0, +1
    mode_index: int             # 0..3 within the cluster
    detuning_mhz: float         # relative to the memory resonance

    def __post_init__(self):
        if self.cluster_index not in CLUSTER_INDICES:
            raise ValueError(f"cluster_index must be in {CLUSTER_INDICES}")
        if not 0 <= self.mode_index < MODES_PER_CLUSTER:
            raise ValueError(f"mode_index must be in [0, {MODES_PER_CLUSTER})")

    @property
    def is_main_cluster(self) -> bool:
        return self.cluster_index == 0


def mode_table(resonant_mode_index: int = 1,
               cluster_spacing_mhz: float = CLUSTER_SPACING_MHZ,
               mode_spacing_mhz: float = MODE_SPACING_MHZ) -> tuple[SpectralMode, ...]:
    """All 12 modes, flat order cluster-major. Exactly one has detuning 0."""
    if not 0 <= resonant_mode_index < MODES_PER_CLUSTER:
        raise ValueError("resonant_mode_index out of range")
    modes = []
    for cluster in CLUSTER_INDICES:
        for m in range(MODES_PER_CLUSTER):
            detuning = cluster * cluster_spacing_mhz + (m - resonant_mode_index) * mode_spacing_mhz
            modes.append(SpectralMode(cluster, m, detuning))
    table = tuple(modes)
    assert sum(1 for md in table if md.detuning_mhz == 0.0) == 1
    return table


@dataclass(frozen=True)
class PhotonEvent:
    """A single photon at a point in the chain. Noise photons have pair_id None."""

    arm: str                    # "signal" | "idler"
    time_ps: int
    mode: SpectralMode | None   # None marks broadband noise
    pair_id: int | None = None

    def __post_init__(self):
        if self.arm not in ("signal", "idler"):
            raise ValueError("arm must be 'signal' or 'idler'")
        if self.mode is None and self.arm != "signal":
            raise ValueError("broadband noise occurs only in the signal arm")


class RandomStreams:
    """Named, independent RNG streams derived from one master seed.

    Each (name) or (name, slice) pair maps to its own PCG64 generator seeded
    from SeedSequence([master, H(name), slice]); draws on one stream never
    perturb another, and identical (config, seed) runs replay byte-identically.
    """

    def __init__(self, master_seed: int):
        if not 0 <= int(master_seed) < 2**63:
            raise ValueError("seed must be a non-negative 63-bit integer")
        self.master_seed = int(master_seed)

    @staticmethod
    def _name_key(name: str) -> int:
        return int.from_bytes(hashlib.blake2s(name.encode()).digest()[:8], "little")

    def stream(self, name: str) -> np.random.Generator:
        seq = np.random.SeedSequence([self.master_seed, self._name_key(name)])
        return np.random.default_rng(seq)

    def slice_stream(self, name: str, index: int) -> np.random.Generator:
        seq = np.random.SeedSequence([self.master_seed, self._name_key(name), int(index)])
        return np.random.default_rng(seq)


@dataclass
class Intervals:
    """Sorted, disjoint half-open [start, end) intervals on the ps grid."""

    starts: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    ends: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        self.starts = np.asarray(self.starts, dtype=np.int64)
        self.ends = np.asarray(self.ends, dtype=np.int64)
        if self.starts.shape != self.ends.shape:
            raise ValueError("starts and ends must have equal length")
        if np.any(self.ends <= self.starts):
            raise ValueError("intervals must be non-empty with end > start")
        if self.starts.size > 1:
            if np.any(self.starts[1:] < self.ends[:-1]):
                raise ValueError("intervals must be sorted and disjoint")

    @classmethod
    def from_pairs(cls, pairs) -> "Intervals":
        """Build from (start, end) pairs, merging overlaps."""
        pairs = sorted((int(a), int(b)) for a, b in pairs)
        starts, ends = [], []
        for a, b in pairs:
            if b <= a:
                raise ValueError("interval end must exceed start")
            if starts and a <= ends[-1]:
                ends[-1] = max(ends[-1], b)
            else:
                starts.append(a)
                ends.append(b)
        return cls(np.array(starts, dtype=np.int64), np.array(ends, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.starts.size)

    def total_ps(self) -> int:
        return int(np.sum(self.ends - self.starts))

    def contains(self, times: np.ndarray) -> np.ndarray:
        """Vectorized membership test (half-open semantics)."""
        times = np.asarray(times, dtype=np.int64)
        if self.starts.size == 0:
            return np.zeros(times.shape, dtype=bool)
        idx = np.searchsorted(self.starts, times, side="right") - 1
        inside = idx >= 0
        inside[inside] = times[inside] < self.ends[idx[inside]]
        return inside

    def contains_open(self, times: np.ndarray) -> np.ndarray:
        """Membership with an open left edge: start < t < end.

        Used for pump-off windows, which cannot void the emission that
        triggered them (the window starts at or after that emission).
        """
        times = np.asarray(times, dtype=np.int64)
        if self.starts.size == 0:
            return np.zeros(times.shape, dtype=bool)
        idx = np.searchsorted(self.starts, times, side="left") - 1
        inside = idx >= 0
        inside[inside] = times[inside] < self.ends[idx[inside]]
        return inside

    def intersect(self, other: "Intervals") -> "Intervals":
        """Pairwise intersection of two interval sets."""
        out = []
        i = j = 0
        while i < len(self) and j < len(other):
            a = max(self.starts[i], other.starts[j])
            b = min(self.ends[i], other.ends[j])
            if a < b:
                out.append((a, b))
            if self.ends[i] <= other.ends[j]:
                i += 1
            else:
                j += 1
        if not out:
            return Intervals()
        return Intervals.from_pairs(out)

    def clip(self, lo: int, hi: int) -> "Intervals":
        if hi <= lo:
            return Intervals()
        out = [(max(int(a), lo), min(int(b), hi))
               for a, b in zip(self.starts, self.ends)
               if min(int(b), hi) > max(int(a), lo)]
        return Intervals.from_pairs(out) if out else Intervals()

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n uniform random times within the union, sorted, int64 ps."""
        if n == 0 or len(self) == 0:
            return np.empty(0, dtype=np.int64)
        lengths = self.ends - self.starts
        cum = np.concatenate(([0], np.cumsum(lengths)))
        offsets = rng.integers(0, cum[-1], size=n)
        seg = np.searchsorted(cum, offsets, side="right") - 1
        times = self.starts[seg] + (offsets - cum[seg])
        return np.sort(times).astype(np.int64)


def periodic_on_intervals(period_ps: int, on_ps: int, duration_ps: int,
                          phase_ps: int = 0) -> Intervals:
    """On-windows [k*period + phase, k*period + phase + on) clipped to the run."""
    if not 0 < on_ps <= period_ps:
        raise ValueError("need 0 < on_ps <= period_ps")
    if on_ps == period_ps:
        return Intervals(np.array([0]), np.array([duration_ps]))
    first = -(period_ps) + phase_ps % period_ps
    ks = np.arange(first, duration_ps + period_ps, period_ps, dtype=np.int64)
    pairs = [(k, k + on_ps) for k in ks]
    return Intervals.from_pairs(pairs).clip(0, duration_ps)

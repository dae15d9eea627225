"""Optical transport between source and cryostat: periodic cavity filters,
passive loss budgets and the polarization-dependent crystal absorption."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SpectralMode


@dataclass(frozen=True)
class CavitySpec:
    """Periodic Lorentzian filter (etalon or resonant cavity)."""

    name: str
    fsr_mhz: float
    linewidth_fwhm_mhz: float
    peak_transmission: float

    def __post_init__(self):
        if self.fsr_mhz <= 0 or self.linewidth_fwhm_mhz <= 0:
            raise ValueError("FSR and linewidth must be positive")
        if self.linewidth_fwhm_mhz >= self.fsr_mhz:
            raise ValueError("linewidth must be below the FSR")
        if not 0 < self.peak_transmission <= 1:
            raise ValueError("peak transmission must be in (0, 1]")


def cavity_transmission(spec: CavitySpec, detuning_mhz) -> np.ndarray | float:
    """Lorentzian transmission, detuning folded into [-FSR/2, FSR/2)."""
    d = np.asarray(detuning_mhz, dtype=float)
    half = spec.fsr_mhz / 2.0
    wrapped = np.mod(d + half, spec.fsr_mhz) - half
    t = spec.peak_transmission / (1.0 + (2.0 * wrapped / spec.linewidth_fwhm_mhz) ** 2)
    return float(t) if np.isscalar(detuning_mhz) else t


@dataclass(frozen=True)
class LossTable:
    """Ordered passive-loss budget; each entry is (element name, transmission)."""

    elements: tuple[tuple[str, float], ...]

    def __post_init__(self):
        seen = set()
        for name, t in self.elements:
            if not 0 < t <= 1:
                raise ValueError(f"transmission of {name!r} must be in (0, 1]")
            if name in seen:
                raise ValueError(f"duplicate loss element {name!r}")
            seen.add(name)

    @classmethod
    def from_dict(cls, entries: dict[str, float]) -> "LossTable":
        return cls(tuple(entries.items()))

    def product(self) -> float:
        return math.prod(t for _, t in self.elements)

    def product_without(self, name: str) -> float:
        if name not in self:
            raise KeyError(name)
        return math.prod(t for n, t in self.elements if n != name)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.elements)

    def get(self, name: str) -> float:
        for n, t in self.elements:
            if n == name:
                return t
        raise KeyError(name)


def path_transmission(table: LossTable) -> float:
    """Product of all element transmissions (order is irrelevant)."""
    return table.product()


@dataclass(frozen=True)
class ArmChain:
    """A full arm: passive losses plus at most one spectrally selective element.

    The selective element's row stays in the loss table (its peak transmission);
    survival multiplies the remaining rows by its Lorentzian lineshape. With
    `mode_selective=False` (idler filter-cavity toggle) the element keeps its
    listed transmission but passes all main-cluster modes flat; secondary
    clusters are outside the arm's detection band either way.
    """

    losses: LossTable
    filter_spec: CavitySpec | None = None
    filter_row: str | None = None
    mode_selective: bool = True

    def __post_init__(self):
        if (self.filter_spec is None) != (self.filter_row is None):
            raise ValueError("filter_spec and filter_row must be given together")
        if self.filter_row is not None and self.filter_row not in self.losses:
            raise ValueError(f"loss table has no row {self.filter_row!r}")

    def passive_transmission(self) -> float:
        if self.filter_row is None:
            return self.losses.product()
        return self.losses.product_without(self.filter_row)

    def mode_survival(self, mode: SpectralMode) -> float:
        passive = self.passive_transmission()
        if self.filter_spec is None:
            return passive
        if not self.mode_selective:
            if not mode.is_main_cluster:
                return 0.0
            return passive * self.losses.get(self.filter_row)
        return passive * cavity_transmission(self.filter_spec, mode.detuning_mhz)

    def survival_by_mode(self, modes: tuple[SpectralMode, ...]) -> np.ndarray:
        return np.array([self.mode_survival(m) for m in modes], dtype=float)

    def broadband_survival(self) -> float:
        # Broadband noise takes every listed transmission at face value; the
        # absolute noise level is a calibration input, so the spectral average
        # of the filter is folded into the configured rate.
        return self.losses.product()


def apply_chain(events, arm: ArmChain, modes: tuple[SpectralMode, ...],
                rng: np.random.Generator):
    """Bernoulli-thin a list of PhotonEvents through an arm. Returns survivors."""
    survival = arm.survival_by_mode(modes)
    lookup = {(m.cluster_index, m.mode_index): survival[i] for i, m in enumerate(modes)}
    out = []
    for ev in events:
        p = arm.broadband_survival() if ev.mode is None else lookup[(ev.mode.cluster_index, ev.mode.mode_index)]
        if rng.random() < p:
            out.append(ev)
    return out


@dataclass(frozen=True)
class DichroismModel:
    """Polarization-angle interpolation of the crystal's optical depth."""

    od_d1: float = 1.4   # OD along D1
    od_d2: float = 6.9   # OD along D2

    def od_at(self, theta_deg) -> np.ndarray | float:
        th = np.deg2rad(np.asarray(theta_deg, dtype=float))
        od = self.od_d1 * np.cos(th) ** 2 + self.od_d2 * np.sin(th) ** 2
        return float(od) if np.isscalar(theta_deg) else od


def crystal_survival(model: DichroismModel, theta_deg: float, resonant: bool) -> float:
    """Intensity survival through the untailored line at polarization angle theta."""
    if not resonant:
        return 1.0
    return math.exp(-model.od_at(theta_deg))

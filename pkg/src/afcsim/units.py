"""Time grid and unit handling.

All event times live on an integer picosecond grid; floats are never used for
timestamps. Config values carry explicit unit suffixes which are converted to
canonical units here (times -> int ps, frequencies -> float MHz, rates -> Hz,
power -> mW, percentages -> fractions).
"""

from __future__ import annotations

from fractions import Fraction

PS_PER_NS = 1_000
PS_PER_US = 1_000_000
PS_PER_MS = 1_000_000_000
PS_PER_S = 1_000_000_000_000


class UnitError(ValueError):
    """Raised for unknown suffixes or values that do not fit the target grid."""


def ns(value: float | int) -> int:
    return _to_ps(value, PS_PER_NS, "ns")


def us(value: float | int) -> int:
    return _to_ps(value, PS_PER_US, "us")


def ms(value: float | int) -> int:
    return _to_ps(value, PS_PER_MS, "ms")


def seconds(value: float | int) -> int:
    return _to_ps(value, PS_PER_S, "s")


def ps_to_ns(t_ps: int) -> float:
    return t_ps / PS_PER_NS


def ps_to_s(t_ps: int) -> float:
    return t_ps / PS_PER_S


def _to_ps(value: float | int, scale: int, unit: str) -> int:
    # Fraction keeps "0.5 ns" exact; "0.0003 ns" would silently leave the grid.
    frac = Fraction(str(value)) * scale
    if frac.denominator != 1:
        raise UnitError(f"{value} {unit} is not an integer number of picoseconds")
    return int(frac)


# suffix -> (kind, factor to canonical unit of that kind)
_TIME_SUFFIXES = {"ps": 1, "ns": PS_PER_NS, "us": PS_PER_US, "ms": PS_PER_MS, "s": PS_PER_S}
_FREQ_SUFFIXES = {"Hz": 1e-6, "kHz": 1e-3, "MHz": 1.0, "GHz": 1e3}
_FREQ_EXP = {"Hz": 0, "kHz": 3, "MHz": 6, "GHz": 9}


def parse_frequency(text: str, canonical: str = "MHz") -> float:
    """Frequency with suffix, rescaled to `canonical` with one float rounding.

    A value written in the canonical unit parses back bit-exactly, which the
    config round-trip relies on.
    """
    parts = text.strip().split()
    if len(parts) != 2 or parts[1] not in _FREQ_EXP:
        raise UnitError(f"expected '<number> Hz|kHz|MHz|GHz', got {text!r}")
    value = _parse_number(parts[0])
    diff = _FREQ_EXP[parts[1]] - _FREQ_EXP[canonical]
    if diff == 0:
        return value
    if diff > 0:
        return value * (10.0 ** diff)
    return value / (10.0 ** (-diff))


def parse_scalar(text: str):
    """Parse a config value with optional unit suffix.

    Returns (kind, value) where kind is one of 'time' (int ps), 'freq'
    (float MHz), 'power' (float mW), 'fraction', 'angle' (float deg) or
    'plain' (float, no suffix).
    """
    parts = text.strip().split()
    if len(parts) == 1:
        return "plain", _parse_number(parts[0])
    if len(parts) != 2:
        raise UnitError(f"cannot parse value {text!r}")
    number, suffix = parts
    if suffix in _TIME_SUFFIXES:
        return "time", _to_ps(_parse_number(number), _TIME_SUFFIXES[suffix], suffix)
    if suffix in _FREQ_SUFFIXES:
        return "freq", _parse_number(number) * _FREQ_SUFFIXES[suffix]
    if suffix == "mW":
        return "power", _parse_number(number)
    if suffix == "pct":
        return "fraction", _parse_number(number) / 100.0
    if suffix == "deg":
        return "angle", _parse_number(number)
    raise UnitError(f"unknown unit suffix {suffix!r} in {text!r}")


def _parse_number(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise UnitError(f"not a number: {text!r}") from exc


def format_time_ps(t_ps: int) -> str:
    """Render an integer-ps time with the largest exact suffix (for config output)."""
    for suffix, scale in (("s", PS_PER_S), ("ms", PS_PER_MS), ("us", PS_PER_US), ("ns", PS_PER_NS)):
        if t_ps % scale == 0 and abs(t_ps) >= scale:
            return f"{t_ps // scale} {suffix}"
    return f"{t_ps} ps"

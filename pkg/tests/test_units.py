"""Unit parsing, the integer-ps grid, and config-format round trips."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from afcsim.units import (PS_PER_MS, PS_PER_NS, PS_PER_S, PS_PER_US, UnitError,
                          format_time_ps, ms, ns, parse_frequency, parse_scalar,
                          ps_to_ns, ps_to_s, seconds, us)


def test_time_helpers_scale_exactly():
    assert ns(1) == 1_000
    assert us(1) == 1_000_000
    assert ms(1) == 1_000_000_000
    assert seconds(1) == 1_000_000_000_000
    assert ns(0.5) == 500
    assert us(2.5) == 2_500_000


def test_fractional_ps_rejected():
    with pytest.raises(UnitError):
        ns(0.0003)
    with pytest.raises(UnitError):
        us(1e-9)


def test_ps_conversions():
    assert ps_to_ns(2_000) == 2.0
    assert ps_to_s(PS_PER_S) == 1.0


@pytest.mark.parametrize("text,kind,value", [
    ("400 ns", "time", 400_000),
    ("2 us", "time", 2_000_000),
    ("20 ms", "time", 20 * PS_PER_MS),
    ("60 s", "time", 60 * PS_PER_S),
    ("7 ps", "time", 7),
    ("412 MHz", "freq", 412.0),
    ("76 kHz", "freq", 0.076),
    ("16.8 GHz", "freq", 16_800.0),
    ("2 mW", "power", 2.0),
    ("45 pct", "fraction", 0.45),
    ("30 deg", "angle", 30.0),
    ("0.85", "plain", 0.85),
])
def test_parse_scalar_table(text, kind, value):
    got_kind, got = parse_scalar(text)
    assert got_kind == kind
    assert got == value


@pytest.mark.parametrize("bad", ["1 parsec", "fast", "1 2 3", "one ns", ""])
def test_parse_scalar_rejects_garbage(bad):
    with pytest.raises(UnitError):
        parse_scalar(bad)


def test_parse_frequency_identity_in_canonical_unit():
    # values written in the canonical unit must come back bit-exact
    for text, unit, expect in [("76 kHz", "kHz", 76.0), ("412 MHz", "MHz", 412.0),
                               ("3.5 MHz", "MHz", 3.5), ("400 Hz", "Hz", 400.0)]:
        assert parse_frequency(text, canonical=unit) == expect


def test_parse_frequency_rescales():
    assert parse_frequency("1 GHz", canonical="MHz") == 1000.0
    assert parse_frequency("500 kHz", canonical="MHz") == 0.5
    assert parse_frequency("2 MHz", canonical="kHz") == 2000.0
    with pytest.raises(UnitError):
        parse_frequency("5 lightyears")


@given(st.integers(min_value=-10**15, max_value=10**15))
def test_format_time_round_trip(t_ps):
    text = format_time_ps(t_ps)
    kind, value = parse_scalar(text)
    assert kind == "time"
    assert value == t_ps


def test_format_time_picks_largest_exact_suffix():
    assert format_time_ps(2_000_000) == "2 us"
    assert format_time_ps(PS_PER_S * 60) == "60 s"
    assert format_time_ps(1_500) == "1500 ps"
    assert format_time_ps(0) == "0 ps"
    assert format_time_ps(-2_000_000) == "-2 us"


@given(st.floats(min_value=0.001, max_value=10**6, allow_nan=False,
                 allow_infinity=False),
       st.sampled_from(["Hz", "kHz", "MHz", "GHz"]))
def test_frequency_canonical_round_trip(value, unit):
    # repr keeps the float exact, so parse(format) is the identity
    assert parse_frequency(f"{value!r} {unit}", canonical=unit) == value

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loopdnp.constants import MHZ, NS
from loopdnp.spin import Waveform
from loopdnp.waveform_io import (CORPUS_SHA256, WaveformParseError, corpus_names, corpus_text,
                                 format_waveform, load_waveform, parse_waveform,
                                 parse_waveform_file, sha256_text, validate_waveform, wrap_phase)

HEADER = "# format_version=1\n# name=T\n# dt_ns=5\nindex,amp_MHz,phase_rad\n"


def test_corpus_integrity():
    assert corpus_names() == ("LOOP-1", "LOOP-2", "LOOP-3", "LOOP-4", "LOOP-5")
    counts = []
    for name in corpus_names():
        text = corpus_text(name)
        assert sha256_text(text) == CORPUS_SHA256[name]
        w = load_waveform(f"corpus:{name}")
        counts.append(len(w))
        assert w.amplitudes.max() / MHZ == pytest.approx(32.0, abs=1e-12)
        assert validate_waveform(w).ok
    assert counts == [24, 30, 24, 25, 30]


def test_loop1_first_row():
    w = load_waveform("corpus:LOOP-1")
    assert w.amplitudes[0] / MHZ == pytest.approx(30.594, abs=1e-12)
    assert w.phases[0] == -2.026
    assert w.dt_uniform == pytest.approx(5 * NS)


@pytest.mark.parametrize("name", ["LOOP-1", "LOOP-2", "LOOP-3", "LOOP-4", "LOOP-5"])
def test_round_trip_textual(name):
    text = corpus_text(name)
    assert parse_waveform_file(text).to_text() == text
    assert format_waveform(parse_waveform(text)) == text


@pytest.mark.parametrize("name, pulses, period, mod", [
    ("LOOP-1", 24, 120.0, 8.333), ("LOOP-2", 30, 150.0, 6.667), ("LOOP-3", 24, 120.0, 8.333),
    ("LOOP-4", 25, 125.0, 8.0), ("LOOP-5", 30, 150.0, 6.667)])
def test_validation_report(name, pulses, period, mod):
    r = validate_waveform(load_waveform(f"corpus:{name}"), 32 * MHZ)
    assert r.n_pulses == pulses
    assert r.period_ns == pytest.approx(period)
    assert round(r.modulation_mhz, 3) == mod
    assert r.phases_wrapped and r.amplitude_ok
    assert "pulses" in r.to_text()


def test_amplitude_violation_listed():
    w = Waveform.from_arrays("hot", [10 * MHZ, 33 * MHZ], [0.0, 0.0], 5 * NS)
    r = validate_waveform(w, 32 * MHZ)
    assert not r.ok and not r.amplitude_ok
    assert any("pulse 2" in v for v in r.violations)


def test_unwrapped_phase_listed():
    w = Waveform.from_arrays("ph", [1 * MHZ], [4.0], 5 * NS)
    r = validate_waveform(w)
    assert not r.phases_wrapped and not r.ok


@pytest.mark.parametrize("body, line", [
    ("", None),                                  # no pulses
    ("1,1.0\n", 5),                              # missing column
    ("1,1.0,0.0\n3,1.0,0.0\n", 6),               # non-contiguous index
    ("1,-1.0,0.0\n", 5),                         # negative amplitude
    ("1,abc,0.0\n", 5),                          # not a number
])
def test_parse_errors(body, line):
    with pytest.raises(WaveformParseError) as exc:
        parse_waveform(HEADER + body)
    if line is not None:
        assert exc.value.line == line
        assert f"line {line}" in str(exc.value)


@pytest.mark.parametrize("dt", ["0", "-5", "x"])
def test_bad_dt(dt):
    with pytest.raises(WaveformParseError):
        parse_waveform(HEADER.replace("dt_ns=5", f"dt_ns={dt}") + "1,1.0,0.0\n")


def test_load_from_path(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text(corpus_text("LOOP-3"))
    assert load_waveform(p) == load_waveform("corpus:LOOP-3")
    with pytest.raises(KeyError):
        load_waveform("corpus:LOOP-9")


def test_wrap_phase():
    assert wrap_phase(np.pi) == pytest.approx(-np.pi)
    assert wrap_phase(-np.pi) == pytest.approx(-np.pi)
    vals = wrap_phase(np.linspace(-20, 20, 101))
    assert np.all(vals >= -np.pi) and np.all(vals < np.pi)


amps3 = st.integers(0, 32000).map(lambda k: k / 1000)
phases3 = st.integers(-3141, 3141).map(lambda k: k / 1000)


@given(st.lists(st.tuples(amps3, phases3), min_size=1, max_size=40))
@settings(max_examples=50, deadline=None)
def test_round_trip_property(rows):
    body = "".join(f"{i},{a:.3f},{p:.3f}\n" for i, (a, p) in enumerate(rows, start=1))
    text = HEADER + body
    assert format_waveform(parse_waveform(text)) == text


def test_format_wraps_on_request():
    w = Waveform.from_arrays("x", [1 * MHZ], [3.5], 5 * NS)
    text = format_waveform(w, wrap=True)
    assert parse_waveform(text).phases[0] == pytest.approx(3.5 - 2 * np.pi, abs=1e-3)

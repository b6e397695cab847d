"""Waveform file format, the bundled LOOP corpus, and waveform validation.

File layout::

    # format_version=1
    # name=LOOP-1
    # dt_ns=5
    # modulation_MHz=8.333
    index,amp_MHz,phase_rad
    1,30.594,-2.026
    ...

Header comments are ``key=value``; unknown keys are kept as metadata so a
parse/format round trip reproduces the text exactly. Amplitudes and phases
are written with 3 decimals.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .constants import MAX_AMPLITUDE, MHZ, NS
from .spin import Waveform

__all__ = [
    "WaveformParseError", "WaveformFile", "parse_waveform_file", "parse_waveform",
    "format_waveform", "load_waveform", "corpus_names", "corpus_text",
    "CORPUS_SHA256", "sha256_text", "ValidationReport", "validate_waveform", "wrap_phase",
]

FORMAT_VERSION = 1
COLUMNS = ("index", "amp_MHz", "phase_rad")

CORPUS = ("LOOP-1", "LOOP-2", "LOOP-3", "LOOP-4", "LOOP-5")
CORPUS_SHA256 = {
    "LOOP-1": "e5f174e709c1457a03e2a23c74d22465eb428b1082389d3fcdc06a32ef015867",
    "LOOP-2": "a3cce3452b5cc791c2025b73042ce5a1ab281e0d727608f8627aeb6f433385c5",
    "LOOP-3": "354a1d2de472ed81ee878a76c54d067ba170d25a60ab1210dc9dd1e74e51d26d",
    "LOOP-4": "cf95c23a94099c1a89778817b7f1c8a4f27ff531d1493674851d9fb8d681a9a7",
    "LOOP-5": "96619ac714f2516a9eb25be14af13d8c34dec56597ab42d293f9583c18d0050a",
}


class WaveformParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def wrap_phase(phase):
    """Wrap to [-pi, pi)."""
    return (np.asarray(phase) + np.pi) % (2 * np.pi) - np.pi


@dataclass
class WaveformFile:
    """Textual content of a waveform file, kept verbatim field by field."""

    name: str
    dt_ns: str
    rows: list = field(default_factory=list)  # (index, amp_MHz, phase_rad) strings
    metadata: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def to_text(self) -> str:
        lines = [f"# format_version={self.format_version}",
                 f"# name={self.name}",
                 f"# dt_ns={self.dt_ns}"]
        lines += [f"# {k}={v}" for k, v in self.metadata.items()]
        lines.append(",".join(COLUMNS))
        lines += [",".join(row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def to_waveform(self) -> Waveform:
        dt = float(self.dt_ns) * NS
        amps = np.array([float(r[1]) for r in self.rows]) * MHZ
        phases = np.array([float(r[2]) for r in self.rows])
        return Waveform.from_arrays(self.name, amps, phases, dt, self.metadata)


def parse_waveform_file(text: str) -> WaveformFile:
    header = {}
    rows = []
    columns_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" not in body:
                continue
            key, value = body.split("=", 1)
            header[key.strip()] = value.strip()
            continue
        cells = [c.strip() for c in line.split(",")]
        if not columns_seen:
            if tuple(cells) != COLUMNS:
                raise WaveformParseError(f"expected columns {','.join(COLUMNS)}, got {line!r}", lineno)
            columns_seen = True
            continue
        if len(cells) != 3:
            raise WaveformParseError(f"expected 3 columns, got {len(cells)}", lineno)
        try:
            index = int(cells[0])
            amp = float(cells[1])
            phase = float(cells[2])
        except ValueError as exc:
            raise WaveformParseError(str(exc), lineno) from None
        if index != len(rows) + 1:
            raise WaveformParseError(f"non-contiguous index {index}, expected {len(rows) + 1}", lineno)
        if not (math.isfinite(amp) and math.isfinite(phase)):
            raise WaveformParseError("non-finite value", lineno)
        if amp < 0:
            raise WaveformParseError(f"negative amplitude {cells[1]}", lineno)
        rows.append(tuple(cells))
    if not columns_seen:
        raise WaveformParseError("missing column header")
    if not rows:
        raise WaveformParseError("waveform has no pulses")
    for key in ("name", "dt_ns"):
        if key not in header:
            raise WaveformParseError(f"missing header field {key!r}")
    try:
        dt = float(header["dt_ns"])
    except ValueError:
        raise WaveformParseError(f"bad dt_ns {header['dt_ns']!r}") from None
    if not dt > 0:
        raise WaveformParseError(f"dt_ns must be positive, got {header['dt_ns']}")
    version = int(header.pop("format_version", FORMAT_VERSION))
    name = header.pop("name")
    dt_ns = header.pop("dt_ns")
    return WaveformFile(name, dt_ns, rows, header, version)


def parse_waveform(text: str) -> Waveform:
    """Parse waveform text; amplitudes are converted from MHz to rad/s."""
    return parse_waveform_file(text).to_waveform()


def _dt_ns_text(w: Waveform) -> str:
    durations = w.durations
    if w.dt_uniform is None and not np.allclose(durations, durations[0], rtol=0, atol=1e-18):
        raise ValueError("file format requires uniform pulse durations")
    dt = w.dt_uniform if w.dt_uniform is not None else durations[0]
    return f"{dt / NS:g}"


def format_waveform(w: Waveform, wrap: bool = False) -> str:
    """Serialise ``w``; ``wrap=True`` maps phases into [-pi, pi) first."""
    phases = wrap_phase(w.phases) if wrap else w.phases
    rows = [(str(i), f"{a / MHZ:.3f}", f"{p:.3f}")
            for i, (a, p) in enumerate(zip(w.amplitudes, phases), start=1)]
    return WaveformFile(w.name, _dt_ns_text(w), rows, dict(w.metadata)).to_text()


def corpus_names() -> tuple:
    return CORPUS


def corpus_text(name: str) -> str:
    if name not in CORPUS:
        raise KeyError(f"unknown corpus waveform {name!r}; choose from {', '.join(CORPUS)}")
    return resources.files("loopdnp").joinpath("data").joinpath(f"{name}.csv").read_text()


def load_waveform(ref: str | Path) -> Waveform:
    """Load ``corpus:NAME`` or a waveform file path."""
    ref = str(ref)
    if ref.startswith("corpus:"):
        return parse_waveform(corpus_text(ref.split(":", 1)[1]))
    return parse_waveform(Path(ref).read_text())


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ValidationReport:
    name: str
    n_pulses: int
    max_amplitude_mhz: float
    period_ns: float
    modulation_mhz: float
    phases_wrapped: bool
    amplitude_ok: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        lines = [
            f"name            {self.name}",
            f"pulses          {self.n_pulses}",
            f"max_amp_MHz     {self.max_amplitude_mhz:.3f}",
            f"period_ns       {self.period_ns:.3f}",
            f"modulation_MHz  {self.modulation_mhz:.3f}",
            f"phases_wrapped  {'yes' if self.phases_wrapped else 'no'}",
            f"amplitude_cap   {'ok' if self.amplitude_ok else 'VIOLATED'}",
        ]
        lines += [f"violation       {v}" for v in self.violations]
        return "\n".join(lines) + "\n"


def validate_waveform(w: Waveform, max_amp: float = MAX_AMPLITUDE) -> ValidationReport:
    """Check amplitude cap and phase wrapping; never raises for a constructed waveform."""
    amps, phases = w.amplitudes, w.phases
    violations = []
    # 3-decimal MHz files: allow half a unit in the last place
    cap_tol = 0.0005 * MHZ
    over = np.nonzero(amps > max_amp + cap_tol)[0]
    for i in over:
        violations.append(f"pulse {i + 1}: amplitude {amps[i] / MHZ:.3f} MHz exceeds "
                          f"cap {max_amp / MHZ:.3f} MHz")
    bad_phase = np.nonzero((phases < -np.pi - 5e-4) | (phases >= np.pi))[0]
    for i in bad_phase:
        violations.append(f"pulse {i + 1}: phase {phases[i]:.3f} outside [-pi, pi)")
    return ValidationReport(
        name=w.name,
        n_pulses=len(w),
        max_amplitude_mhz=float(amps.max() / MHZ),
        period_ns=w.period / NS,
        modulation_mhz=w.modulation_frequency / 1e6,
        phases_wrapped=len(bad_phase) == 0,
        amplitude_ok=len(over) == 0,
        violations=violations,
    )

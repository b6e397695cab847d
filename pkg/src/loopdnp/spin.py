"""Two-spin (electron S, proton I) operator algebra and rotating-frame Hamiltonian.

All frequencies are angular (rad/s); MHz appears only at I/O boundaries.
Spin-1/2 operators have eigenvalues +-1/2, so ``Tr[Sz @ Sz] == 1`` on the
4-dimensional product space and the Sz -> Iz transfer is normalised to [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constants import ANGSTROM, GAMMA_E, GAMMA_H, HBAR, MU0

__all__ = [
    "SX", "SY", "SZ", "IX", "IY", "IZ", "ID4", "BASIS",
    "SpinSystem", "Pulse", "Waveform",
    "build_hamiltonian", "static_hamiltonian", "mw_operators",
    "dipolar_constant", "crystallite_couplings",
]

_sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_sy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_sz = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_e2 = np.eye(2, dtype=complex)

SX, SY, SZ = (np.kron(o, _e2) for o in (_sx, _sy, _sz))
IX, IY, IZ = (np.kron(_e2, o) for o in (_sx, _sy, _sz))
ID4 = np.eye(4, dtype=complex)

for _op in (SX, SY, SZ, IX, IY, IZ):
    _op.setflags(write=False)


def _product_basis():
    basis = {}
    for a, s in zip("xyz", (SX, SY, SZ)):
        basis["S" + a] = s
    for a, i in zip("xyz", (IX, IY, IZ)):
        basis["I" + a] = i
    for a, s in zip("xyz", (SX, SY, SZ)):
        for b, i in zip("xyz", (IX, IY, IZ)):
            basis[f"2S{a}I{b}"] = 2 * s @ i
    for op in basis.values():
        op.setflags(write=False)
    return basis


#: The 15 traceless product operators, orthonormal under Tr[A^dagger B].
BASIS: dict[str, np.ndarray] = _product_basis()


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SpinSystem:
    """Rotating-frame parameters of the electron-proton pair (all rad/s)."""

    offset_e: float = 0.0
    larmor_n: float = 0.0
    hf_secular: float = 0.0
    hf_pseudosecular: float = 0.0

    def __post_init__(self):
        _check_finite(offset_e=self.offset_e, larmor_n=self.larmor_n,
                      hf_secular=self.hf_secular,
                      hf_pseudosecular=self.hf_pseudosecular)


@dataclass(frozen=True)
class Pulse:
    """Piecewise-constant microwave segment: amplitude (rad/s), phase (rad), duration (s)."""

    amplitude: float
    phase: float
    duration: float

    def __post_init__(self):
        _check_finite(amplitude=self.amplitude, phase=self.phase,
                      duration=self.duration)
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


@dataclass(frozen=True)
class Waveform:
    """One modulation period of microwave pulses.

    ``metadata`` carries free-form ``key=value`` header fields from the
    waveform file format (modulation frequency, provenance, ...) so that a
    parse/format round trip is lossless.
    """

    name: str
    pulses: tuple[Pulse, ...]
    dt_uniform: float | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not self.pulses:
            raise ValueError("waveform must contain at least one pulse")

    @classmethod
    def from_arrays(cls, name, amplitudes, phases, dt, metadata=None):
        """Build a uniform-duration waveform from amplitude (rad/s) and phase arrays."""
        amplitudes = np.asarray(amplitudes, dtype=float)
        phases = np.asarray(phases, dtype=float)
        if amplitudes.shape != phases.shape or amplitudes.ndim != 1:
            raise ValueError("amplitudes and phases must be 1-D arrays of equal length")
        pulses = tuple(Pulse(float(a), float(p), float(dt))
                       for a, p in zip(amplitudes, phases))
        return cls(name, pulses, float(dt), dict(metadata or {}))

    def __len__(self):
        return len(self.pulses)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.pulses])

    @property
    def phases(self) -> np.ndarray:
        return np.array([p.phase for p in self.pulses])

    @property
    def durations(self) -> np.ndarray:
        return np.array([p.duration for p in self.pulses])

    @property
    def period(self) -> float:
        """Modulation period tau_m (s)."""
        return float(math.fsum(p.duration for p in self.pulses))

    @property
    def modulation_frequency(self) -> float:
        """omega_m / (2 pi) in Hz."""
        return 1.0 / self.period

    @property
    def omega_m(self) -> float:
        return 2.0 * math.pi / self.period

    def scaled(self, scale: float) -> "Waveform":
        """Copy with every amplitude multiplied by ``scale`` (B1 inhomogeneity)."""
        pulses = tuple(Pulse(p.amplitude * scale, p.phase, p.duration)
                       for p in self.pulses)
        return Waveform(self.name, pulses, self.dt_uniform, dict(self.metadata))

    def reversed_conjugate(self) -> "Waveform":
        """Time-reversed, phase-negated copy."""
        pulses = tuple(Pulse(p.amplitude, -p.phase, p.duration)
                       for p in reversed(self.pulses))
        return Waveform(self.name + "-rev", pulses, self.dt_uniform)


def mw_operators(phase):
    """cos(phase) Sx + sin(phase) Sy, broadcast over ``phase``."""
    phase = np.asarray(phase, dtype=float)[..., None, None]
    return np.cos(phase) * SX + np.sin(phase) * SY


def static_hamiltonian(offset_e, larmor_n, hf_secular, hf_pseudosecular):
    """Drift part of the Hamiltonian; arguments broadcast to a stack of 4x4 matrices."""
    args = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in
                                 (offset_e, larmor_n, hf_secular, hf_pseudosecular)))
    d, w, a, b = (x[..., None, None] for x in args)
    return d * SZ + w * IZ + a * (SZ @ IZ) + b * (SZ @ IX)


def build_hamiltonian(system: SpinSystem, pulse: Pulse) -> np.ndarray:
    """Rotating-frame Hamiltonian during ``pulse``.

    H = dw_S Sz + w_I Iz + A Sz Iz + B Sz Ix + w_MW (cos(phi) Sx + sin(phi) Sy)
    """
    h = static_hamiltonian(system.offset_e, system.larmor_n,
                           system.hf_secular, system.hf_pseudosecular)
    return h + pulse.amplitude * mw_operators(pulse.phase)


def dipolar_constant(r: float) -> float:
    """Point-dipole hyperfine anisotropy T (rad/s) for an e-1H distance ``r`` in metres."""
    if not (r > 0 and math.isfinite(r)):
        raise ValueError(f"distance must be positive and finite, got {r!r}")
    return MU0 / (4 * math.pi) * GAMMA_E * GAMMA_H * HBAR / r**3


def dipolar_constant_angstrom(r_angstrom: float) -> float:
    return dipolar_constant(r_angstrom * ANGSTROM)


def crystallite_couplings(T, beta):
    """Secular and pseudo-secular couplings (A, B) at polar angle ``beta``.

    A = T (3 cos^2 beta - 1),  B = 3 T sin beta cos beta.  Broadcasts over arrays.
    """
    T = np.asarray(T, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if not (np.all(np.isfinite(T)) and np.all(np.isfinite(beta))):
        raise ValueError("T and beta must be finite")
    c, s = np.cos(beta), np.sin(beta)
    a = T * (3 * c**2 - 1)
    b = 3 * T * s * c
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def hamiltonian_stack(systems: Sequence[SpinSystem] | Iterable[SpinSystem]) -> np.ndarray:
    """Stack the drift Hamiltonians of several systems into an (n, 4, 4) array."""
    systems = list(systems)
    return static_hamiltonian([s.offset_e for s in systems],
                              [s.larmor_n for s in systems],
                              [s.hf_secular for s in systems],
                              [s.hf_pseudosecular for s in systems])

"""Effective Hamiltonian of one modulation period and the resonance condition.

The effective Hamiltonian is the principal matrix logarithm of the period
propagator, ``H_eff = (i / tau_m) log U``. Resonant Sz -> Iz transfer needs
the nuclear Larmor frequency, a harmonic of the modulation frequency and the
electron effective field to cancel: ``w_0I + k w_m + w_eff = 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .propagation import period_propagators
from .spin import BASIS, IX, IY, SX, SY, Waveform, static_hamiltonian

__all__ = [
    "BranchWarning", "EffectiveHamiltonian", "effective_hamiltonian",
    "EffectiveField", "electron_effective_field", "rotation_axis_angle",
    "ResonanceReport", "resonance_match", "zq_dq_projection",
    "ZQ_X", "ZQ_Y", "DQ_X", "DQ_Y", "TwoLevelModel", "two_level_model",
]

BRANCH_TOL = 1e-6

ZQ_X = SX @ IX + SY @ IY
ZQ_Y = SY @ IX - SX @ IY
DQ_X = SX @ IX - SY @ IY
DQ_Y = SX @ IY + SY @ IX


class BranchWarning(UserWarning):
    """A rotation angle sits on the branch cut of the logarithm."""


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Time-independent generator reproducing one period.

    ``coefficients`` maps the 15 product-operator labels to amplitudes in
    rad/s; ``identity_part`` is the trace component (a global phase), so
    ``h_eff == identity_part * 1 + sum(c * BASIS[k])``.
    """

    h_eff: np.ndarray
    tau_m: float
    coefficients: dict = field(default_factory=dict)
    identity_part: float = 0.0
    branch_ambiguous: bool = False

    def reconstruct(self) -> np.ndarray:
        h = self.identity_part * np.eye(4, dtype=complex)
        for label, c in self.coefficients.items():
            h = h + c * BASIS[label]
        return h


def effective_hamiltonian(u, tau_m: float) -> EffectiveHamiltonian:
    """Principal-branch effective Hamiltonian of the period propagator ``u``."""
    if not tau_m > 0:
        raise ValueError("tau_m must be positive")
    u = np.asarray(u, dtype=complex)
    # complex Schur form of a normal matrix is diagonal with a unitary basis,
    # which stays orthonormal for degenerate eigenvalues
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))  # in (-pi, pi]
    ambiguous = bool(np.any(np.abs(np.abs(phases) - math.pi) < BRANCH_TOL))
    h = (z * (-phases / tau_m)) @ z.conj().T
    h = 0.5 * (h + h.conj().T)
    coefficients = {label: float(np.real(np.trace(op @ h))) for label, op in BASIS.items()}
    identity = float(np.real(np.trace(h))) / 4.0
    return EffectiveHamiltonian(h, tau_m, coefficients, identity, ambiguous)


class EffectiveField(NamedTuple):
    magnitude: float  # rad/s, signed by the z component of the axis
    axis: np.ndarray  # unit 3-vector


def rotation_axis_angle(u2):
    """Rotation angle in [0, pi] and unit axis of a 2x2 unitary (global phase ignored)."""
    u2 = np.asarray(u2, dtype=complex)
    u2 = u2 / np.sqrt(np.linalg.det(u2))
    # u2 = cos(t/2) 1 - i sin(t/2) n.sigma
    c = np.real(u2[0, 0] + u2[1, 1]) / 2
    n = np.array([
        -np.imag(u2[0, 1] + u2[1, 0]) / 2,
        np.real(u2[1, 0] - u2[0, 1]) / 2,
        -np.imag(u2[0, 0] - u2[1, 1]) / 2,
    ])
    if c < 0:  # -U is the same SO(3) rotation
        c, n = -c, -n
    s = np.linalg.norm(n)
    angle = 2.0 * math.atan2(s, c)
    if s < 1e-15:
        return 0.0, np.array([0.0, 0.0, 1.0])
    return angle, n / s


def electron_effective_field(w: Waveform, offset: float = 0.0, scale: float = 1.0) -> EffectiveField:
    """Electron-only effective field of one period (A = B = w_I = 0).

    Magnitude is angle / tau_m with the sign of the axis z component, so a
    free precession at ``offset`` is returned folded into (-pi/tau_m, pi/tau_m].
    """
    h0 = static_hamiltonian(offset, 0.0, 0.0, 0.0)[None]
    u = period_propagators(h0, w.amplitudes, w.phases, w.durations, scale)[0]
    # the electron block: with no I terms U = u2 (x) 1
    u2 = u[::2, ::2]
    angle, axis = rotation_axis_angle(u2)
    if abs(angle - math.pi) < BRANCH_TOL:
        warnings.warn("effective rotation angle is pi; field sign is ambiguous", BranchWarning)
    sign = 1.0 if axis[2] >= 0 else -1.0
    return EffectiveField(sign * angle / w.period, axis)


@dataclass(frozen=True)
class ResonanceReport:
    k_I: int
    omega_eff_required: float
    mismatch: float


def resonance_match(omega_0I: float, omega_m: float, omega_eff: float | None = None,
                    signed: bool = True) -> ResonanceReport:
    """Resolve w_0I + k w_m + w_eff = 0 for the harmonic order k.

    Without ``omega_eff`` the order giving the smallest required |w_eff| is
    returned. With ``signed=False`` only magnitudes are matched, i.e. k
    minimises ||w_0I + k w_m| - |w_eff||, which sidesteps the sign convention
    of the effective field.
    """
    if not omega_m > 0:
        raise ValueError("omega_m must be positive")
    if omega_eff is None:
        k = math.floor(-omega_0I / omega_m + 0.5)
        required = -(omega_0I + k * omega_m)
        return ResonanceReport(int(k), required, 0.0)
    if signed:
        k = math.floor(-(omega_0I + omega_eff) / omega_m + 0.5)
        required = -(omega_0I + k * omega_m)
        return ResonanceReport(int(k), required, omega_0I + k * omega_m + omega_eff)
    target = abs(omega_eff)
    k0 = -omega_0I / omega_m
    span = int(math.ceil(target / omega_m)) + 2
    candidates = range(math.floor(k0) - span, math.ceil(k0) + span + 1)
    k = min(candidates, key=lambda j: (abs(abs(omega_0I + j * omega_m) - target), abs(j)))
    required = -(omega_0I + k * omega_m)
    return ResonanceReport(int(k), required, abs(required) - target)


def _coeff(h, op):
    return float(np.real(np.trace(op @ h)) / np.real(np.trace(op @ op)))


def zq_dq_projection(h_eff) -> tuple[float, float]:
    """Transverse zero- and double-quantum amplitudes of an effective Hamiltonian."""
    h = h_eff.h_eff if isinstance(h_eff, EffectiveHamiltonian) else np.asarray(h_eff)
    zq = math.hypot(_coeff(h, ZQ_X), _coeff(h, ZQ_Y))
    dq = math.hypot(_coeff(h, DQ_X), _coeff(h, DQ_Y))
    return zq, dq


def _su2_to(vec):
    """2x2 unitary rotating the unit vector ``vec`` onto +z."""
    n = np.asarray(vec, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        return np.eye(2, dtype=complex)
    n = n / norm
    axis = np.cross(n, [0.0, 0.0, 1.0])
    s = np.linalg.norm(axis)
    angle = math.atan2(s, n[2])
    if s < 1e-15:
        axis = np.array([1.0, 0.0, 0.0])
    else:
        axis = axis / s
    sigma = (axis[0] * np.array([[0, 1], [1, 0]]) + axis[1] * np.array([[0, -1j], [1j, 0]])
             + axis[2] * np.array([[1, 0], [0, -1]]))
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sigma


class TwoLevelModel(NamedTuple):
    """ZQ/DQ description in the frame where both effective fields point along +z.

    ``tilt_s``/``tilt_i`` are the z components of the original field axes;
    they project the initial Sz and the read-out Iz onto the aligned frame.
    """

    field_s: float
    field_i: float
    zq_amp: float
    dq_amp: float
    tilt_s: float
    tilt_i: float

    @property
    def zq_detuning(self) -> float:
        return self.field_s - self.field_i

    @property
    def dq_detuning(self) -> float:
        return self.field_s + self.field_i

    @property
    def zq_depth(self) -> float:
        """Maximum population swapped in the ZQ subspace."""
        b, d = self.zq_amp, self.zq_detuning
        return b * b / (b * b + d * d) if b else 0.0

    @property
    def dq_depth(self) -> float:
        b, d = self.dq_amp, self.dq_detuning
        return b * b / (b * b + d * d) if b else 0.0

    def predict(self, t):
        """Approximate <Iz>(t): ZQ transfer adds, DQ transfer subtracts."""
        t = np.asarray(t, dtype=float)
        w_zq = math.hypot(self.zq_amp, self.zq_detuning)
        w_dq = math.hypot(self.dq_amp, self.dq_detuning)
        p = self.zq_depth * np.sin(w_zq * t / 2) ** 2 - self.dq_depth * np.sin(w_dq * t / 2) ** 2
        return self.tilt_s * self.tilt_i * p


def two_level_model(h_eff: EffectiveHamiltonian) -> TwoLevelModel:
    """Reduce an effective Hamiltonian to independent ZQ and DQ two-level problems.

    Each spin is rotated so that its single-spin effective field lies along
    +z; bilinear terms other than the ZQ/DQ flip operators are dropped.
    Which subspace actually transfers polarisation is set by the detunings,
    not by the raw ZQ/DQ amplitudes.
    """
    c = h_eff.coefficients
    vs = np.array([c["Sx"], c["Sy"], c["Sz"]])
    vi = np.array([c["Ix"], c["Iy"], c["Iz"]])
    r = np.kron(_su2_to(vs), _su2_to(vi))
    h = r @ h_eff.h_eff @ r.conj().T
    zq, dq = zq_dq_projection(h)
    ns, ni = np.linalg.norm(vs), np.linalg.norm(vi)
    return TwoLevelModel(float(ns), float(ni), zq, dq,
                         float(vs[2] / ns) if ns else 1.0, float(vi[2] / ni) if ni else 1.0)

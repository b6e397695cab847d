"""Piecewise-constant propagation and the Sz -> Iz transfer read-out.

Propagators are plain ``(..., 4, 4)`` complex arrays. Every routine accepts
stacks so that offsets, orientations and B1 scales can be propagated together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin import IZ, SZ, ID4, SpinSystem, Waveform, build_hamiltonian, mw_operators

__all__ = [
    "expm_hermitian", "pulse_propagator", "sequence_propagator", "period_propagators",
    "replicate", "fidelity_iz", "transfer_trace", "TransferTrace", "is_unitary",
]

_IZ_DIAG = np.real(np.diag(IZ))
_SZ_DIAG = np.real(np.diag(SZ))


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_unitary(u, tol=1e-10) -> bool:
    """Frobenius check ||U^dagger U - 1|| < tol for a single matrix or a stack."""
    err = np.linalg.norm(_dagger(u) @ u - ID4[: u.shape[-1], : u.shape[-1]], axis=(-2, -1))
    return bool(np.all(err < tol))


def expm_hermitian(h, dt):
    """exp(-i h dt) for a stack of Hermitian matrices via eigendecomposition.

    ``dt`` broadcasts against the leading dimensions of ``h``.
    """
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * w * np.asarray(dt)[..., None])
    return (v * phase[..., None, :]) @ _dagger(v)


def pulse_propagator(h, dt: float) -> np.ndarray:
    """Exact propagator exp(-i h dt) of a constant Hermitian Hamiltonian."""
    h = np.asarray(h, dtype=complex)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    scale = max(np.linalg.norm(h), 1.0)
    if np.linalg.norm(h - _dagger(h)) > 1e-12 * scale:
        raise ValueError("Hamiltonian is not Hermitian")
    return expm_hermitian(h, dt)


def sequence_propagator(w: Waveform, system: SpinSystem) -> np.ndarray:
    """Period propagator U_N ... U_2 U_1 (later pulses act on the left)."""
    if len(w.pulses) == 0:
        raise ValueError("empty waveform")
    u = ID4.copy()
    for pulse in w.pulses:
        u = pulse_propagator(build_hamiltonian(system, pulse), pulse.duration) @ u
    return u


def period_propagators(h0, amplitudes, phases, durations, scales=1.0):
    """Vectorised period propagators for a stack of drift Hamiltonians.

    h0: (M, 4, 4) drift Hamiltonians; scales: (M,) or scalar B1 multipliers
    applied to every pulse amplitude. Returns an (M, 4, 4) stack.
    """
    h0 = np.asarray(h0, dtype=complex)
    scales = np.broadcast_to(np.asarray(scales, dtype=float), h0.shape[:-2])
    ops = mw_operators(phases)
    u = np.broadcast_to(ID4, h0.shape).copy()
    for amp, op, dt in zip(amplitudes, ops, durations):
        h = h0 + (scales * amp)[..., None, None] * op
        u = expm_hermitian(h, dt) @ u
    return u


def replicate(u, n: int):
    """U**n by repeated squaring (works on stacks)."""
    if n < 0:
        raise ValueError("repetition count must be >= 0")
    u = np.asarray(u)
    result = np.broadcast_to(ID4, u.shape).copy()
    base = u
    while n:
        if n & 1:
            result = base @ result
        n >>= 1
        if n:
            base = base @ base
    return result


def fidelity_iz(u):
    """Tr[Iz U Sz U^dagger] for a propagator or a stack of them.

    Sz and Iz are diagonal, so the trace reduces to a weighted sum of |U_jk|^2
    and is real by construction.
    """
    u = np.asarray(u)
    val = np.einsum("j,...jk,k->...", _IZ_DIAG, np.abs(u) ** 2, _SZ_DIAG)
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class TransferTrace:
    """Stroboscopic <Iz> after k = 1..n_max repetitions."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(np.abs(self.values) > 1 + 1e-9):
            raise ValueError("transfer values outside [-1, 1]")


def transfer_trace(w: Waveform, system: SpinSystem, n_max: int,
                   subperiod: bool = False) -> TransferTrace:
    """<Iz>(k tau_m) for k = 1..n_max.

    With ``subperiod=True`` the read-out is taken after every pulse instead
    (debugging aid; times are then pulse boundaries).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if subperiod:
        steps = [pulse_propagator(build_hamiltonian(system, p), p.duration) for p in w.pulses]
        durations = w.durations
        u = ID4.copy()
        t, times, values = 0.0, [], []
        for _ in range(n_max):
            for step, dt in zip(steps, durations):
                u = step @ u
                t += dt
                times.append(t)
                values.append(fidelity_iz(u))
        return TransferTrace(np.array(times), np.array(values))
    period = sequence_propagator(w, system)
    u = ID4.copy()
    values = np.empty(n_max)
    for k in range(n_max):
        u = period @ u
        values[k] = fidelity_iz(u)
    times = np.arange(1, n_max + 1) * w.period
    return TransferTrace(times, values)

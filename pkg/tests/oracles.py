"""Independent reference implementations used only by the tests.

Nothing here calls into loopdnp's numerical core: Hamiltonians are built
from explicit Pauli matrices, time evolution uses classical RK4 or a Taylor
series in extended precision.
"""

import math

import numpy as np

_PX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_PY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_PZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_E = np.eye(2, dtype=complex)

SX, SY, SZ = (np.kron(p, _E) for p in (_PX, _PY, _PZ))
IX, IY, IZ = (np.kron(_E, p) for p in (_PX, _PY, _PZ))


def hamiltonian(offset, larmor, a, b, amp, phase):
    """Explicit two-spin rotating-frame Hamiltonian; broadcasts over leading axes."""
    args = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in
                                 (offset, larmor, a, b, amp, phase)))
    offset, larmor, a, b, amp, phase = (x[..., None, None] for x in args)
    return (offset * SZ + larmor * IZ + a * SZ @ IZ + b * SZ @ IX
            + amp * (np.cos(phase) * SX + np.sin(phase) * SY))


def rk4_propagator(hs, dts, substeps=10_000):
    """Integrate i dU/dt = H U with classical RK4, piecewise-constant H.

    ``hs`` has shape (..., P, 4, 4) for P consecutive segments of length
    ``dts[p]``; the leading axes are integrated side by side.
    """
    hs = np.asarray(hs, dtype=complex)
    u = np.broadcast_to(np.eye(4, dtype=complex), hs.shape[:-3] + (4, 4)).copy()
    eye = np.eye(4, dtype=complex)
    for p, dt in enumerate(dts):
        h = dt / substeps
        f = -1j * hs[..., p, :, :]
        # the RK4 update is linear in U, so build its one-step map once
        k1 = f @ eye
        k2 = f @ (eye + 0.5 * h * k1)
        k3 = f @ (eye + 0.5 * h * k2)
        k4 = f @ (eye + h * k3)
        step = eye + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        for _ in range(substeps):
            u = step @ u
    return u


def naive_power(u, n):
    out = np.eye(4, dtype=complex)
    for _ in range(n):
        out = u @ out
    return out


def fidelity(u):
    return float(np.real(np.trace(IZ @ u @ SZ @ u.conj().T)))


# --- extended precision -------------------------------------------------------

_LD = np.clongdouble


def _expm_ld(x):
    """exp(x) for a stack of small matrices via scaling and Taylor squaring."""
    norm = float(np.max(np.abs(x).sum(axis=-1)))
    s = max(0, int(math.ceil(math.log2(norm / 0.1))) if norm > 0 else 0)
    y = x / _LD(2.0**s)
    eye = np.eye(x.shape[-1], dtype=_LD)
    term = np.broadcast_to(eye, x.shape).copy()
    out = term.copy()
    for k in range(1, 20):
        term = term @ y / _LD(k)
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def objective_ld(amps, phases, dt, offsets, scales, weights, larmor, a, b, n_rep):
    """Replicated averaged <Iz> in long double, batched over control vectors.

    ``amps``/``phases`` are (K, P); returns K objective values.
    """
    amps = np.asarray(amps, dtype=np.longdouble)
    phases = np.asarray(phases, dtype=np.longdouble)
    offs = np.asarray(offsets, dtype=np.longdouble)
    sc = np.asarray(scales, dtype=np.longdouble)
    k, p = amps.shape
    sx, sy, sz, iz, ix = (m.astype(_LD) for m in (SX, SY, SZ, IZ, IX))
    h0 = (offs[:, None, None] * sz + _LD(larmor) * iz + _LD(a) * sz @ iz
          + _LD(b) * sz @ ix)                                   # (T, 4, 4)
    u = np.broadcast_to(np.eye(4, dtype=_LD), (k, len(offs), 4, 4)).copy()
    for j in range(p):
        drive = (np.cos(phases[:, j])[:, None, None] * sx
                 + np.sin(phases[:, j])[:, None, None] * sy) * amps[:, j, None, None]
        h = h0[None] + sc[None, :, None, None] * drive[:, None]
        u = _expm_ld(-1j * _LD(dt) * h) @ u
    w = np.broadcast_to(np.eye(4, dtype=_LD), u.shape).copy()
    base = u
    n = n_rep
    while n:
        if n & 1:
            w = base @ w
        base = base @ base
        n >>= 1
    wh = np.conj(np.swapaxes(w, -1, -2))
    fid = np.real(np.trace(iz @ w @ sz @ wh, axis1=-2, axis2=-1))
    return fid @ np.asarray(weights, dtype=np.longdouble)


def fd_gradient_ld(amps, phases, step_amp, step_phase, **kw):
    """Central-difference gradient of :func:`objective_ld` at one control vector."""
    amps = np.asarray(amps, dtype=np.longdouble)
    phases = np.asarray(phases, dtype=np.longdouble)
    p = len(amps)
    batch_a = np.repeat(amps[None], 4 * p, axis=0)
    batch_p = np.repeat(phases[None], 4 * p, axis=0)
    idx = np.arange(p)
    batch_a[idx, idx] += step_amp
    batch_a[p + idx, idx] -= step_amp
    batch_p[2 * p + idx, idx] += step_phase
    batch_p[3 * p + idx, idx] -= step_phase
    f = objective_ld(batch_a, batch_p, **kw)
    ga = (f[:p] - f[p:2 * p]) / (2 * np.longdouble(step_amp))
    gp = (f[2 * p:3 * p] - f[3 * p:]) / (2 * np.longdouble(step_phase))
    return ga, gp

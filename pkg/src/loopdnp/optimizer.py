"""Replicated state-to-state optimal control of periodic DNP elements.

The figure of merit is <Iz> after ``n_rep`` repetitions of one period,
averaged over a band of electron offsets (uniform weights) and a B1
inhomogeneity ensemble, starting from rho(0) = Sz. Amplitudes are box
constrained to [0, max_amp]; phases are free and wrapped only on export.

Gradients are exact. For a pulse propagator U_j = exp(-i H_j dt) with
H_j = V diag(l) V^dagger, the derivative along dH is

    dU_j = V (G o (V^dagger dH V)) V^dagger,
    G_kl = (e^{-i l_k dt} - e^{-i l_l dt}) / (l_k - l_l),

and the repetition enters through d(U^n) = sum_k U^(n-1-k) dU U^k.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .constants import MAX_AMPLITUDE, MHZ, PROTON_LARMOR_X_BAND, PULSE_DT
from .ensemble import InhomogeneityEnsemble, paper_ensemble
from .propagation import fidelity_iz, period_propagators, replicate
from .spin import ID4, IZ, SX, SY, SZ, Waveform, static_hamiltonian
from .waveform_io import wrap_phase

__all__ = [
    "OptimizationConfig", "ControlVector", "OptimizationResult",
    "objective", "gradient", "objective_and_gradient", "optimize", "optimize_multistart",
    "default_offsets",
]

log = logging.getLogger(__name__)


def default_offsets():
    """-50 .. 50 MHz in 5 MHz steps (rad/s)."""
    return tuple(np.arange(-50, 51, 5, dtype=float) * MHZ)


@dataclass(frozen=True)
class OptimizationConfig:
    n_pulses: int = 24
    dt: float = PULSE_DT
    max_amp: float = MAX_AMPLITUDE
    offsets: tuple = field(default_factory=default_offsets)
    hyperfine: tuple = (-0.40 * MHZ, 1.00 * MHZ)
    larmor_n: float = PROTON_LARMOR_X_BAND
    ensemble: InhomogeneityEnsemble = field(default_factory=paper_ensemble)
    n_rep: int = 7
    max_iters: int = 500
    grad_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(float(o) for o in np.atleast_1d(self.offsets)))
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        if not self.max_amp > 0:
            raise ValueError("max_amp must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.offsets:
            raise ValueError("offsets must be non-empty")
        if self.n_rep < 1:
            raise ValueError("n_rep must be >= 1")

    def targets(self):
        """Drift Hamiltonians, B1 scales and weights for every (offset, scale) target."""
        offs = np.repeat(np.asarray(self.offsets), len(self.ensemble))
        scales = np.tile(np.asarray(self.ensemble.scales), len(self.offsets))
        weights = np.tile(np.asarray(self.ensemble.weights), len(self.offsets)) / len(self.offsets)
        a, b = self.hyperfine
        h0 = static_hamiltonian(offs, self.larmor_n, a, b)
        return h0, scales, weights


@dataclass
class ControlVector:
    """Per-pulse amplitudes (rad/s) and phases (rad)."""

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        self.phases = np.asarray(self.phases, dtype=float)
        if self.amplitudes.shape != self.phases.shape:
            raise ValueError("amplitudes and phases differ in shape")

    @classmethod
    def from_waveform(cls, w: Waveform) -> "ControlVector":
        return cls(w.amplitudes, w.phases)

    @classmethod
    def random(cls, n_pulses, max_amp, rng) -> "ControlVector":
        amps = rng.uniform(0.5, 1.0, n_pulses) * max_amp
        phases = rng.uniform(-np.pi, np.pi, n_pulses)
        return cls(amps, phases)

    def projected(self, max_amp) -> "ControlVector":
        return ControlVector(np.clip(self.amplitudes, 0.0, max_amp), self.phases.copy())

    def to_waveform(self, name, dt, metadata=None) -> Waveform:
        return Waveform.from_arrays(name, self.amplitudes, wrap_phase(self.phases), dt, metadata)


def _check_controls(c: ControlVector, cfg: OptimizationConfig):
    if c.amplitudes.shape != (cfg.n_pulses,):
        raise ValueError(f"expected {cfg.n_pulses} pulses, got {c.amplitudes.shape}")


def objective(c: ControlVector, cfg: OptimizationConfig) -> float:
    """Weighted mean of <Iz> after ``cfg.n_rep`` periods over all targets."""
    _check_controls(c, cfg)
    h0, scales, weights = cfg.targets()
    durations = np.full(cfg.n_pulses, cfg.dt)
    u = period_propagators(h0, c.amplitudes, c.phases, durations, scales)
    return float(fidelity_iz(replicate(u, cfg.n_rep)) @ weights)


def _divided_differences(lam, dt):
    # (e^{-i l_k dt} - e^{-i l_l dt}) / (l_k - l_l), stable for l_k ~ l_l
    lk = lam[..., :, None]
    ll = lam[..., None, :]
    half = 0.5 * dt * (lk - ll)
    return -1j * dt * np.exp(-0.5j * dt * (lk + ll)) * np.sinc(half / np.pi)


def objective_and_gradient(c: ControlVector, cfg: OptimizationConfig):
    """Objective and its exact gradient with respect to amplitudes and phases."""
    _check_controls(c, cfg)
    h0, scales, weights = cfg.targets()
    dt, n = cfg.dt, cfg.n_rep
    amps, phases = c.amplitudes, c.phases
    n_t, n_p = len(weights), cfg.n_pulses

    cos, sin = np.cos(phases)[:, None, None], np.sin(phases)[:, None, None]
    ops = cos * SX + sin * SY          # dH/da per unit scale
    dops = -sin * SX + cos * SY        # dH/dphi per unit scale and amplitude
    h = h0[:, None] + (scales[:, None] * amps[None, :])[..., None, None] * ops[None]
    lam, v = np.linalg.eigh(h)                         # (T, P, 4), (T, P, 4, 4)
    vh = np.conj(np.swapaxes(v, -1, -2))
    steps = (v * np.exp(-1j * lam * dt)[..., None, :]) @ vh

    # before[:, j] = U_{j-1} ... U_0 ; after[:, j] = U_{P-1} ... U_{j+1}
    before = np.empty((n_t, n_p + 1, 4, 4), dtype=complex)
    before[:, 0] = ID4
    for j in range(n_p):
        before[:, j + 1] = steps[:, j] @ before[:, j]
    after = np.empty((n_t, n_p, 4, 4), dtype=complex)
    after[:, n_p - 1] = ID4
    for j in range(n_p - 1, 0, -1):
        after[:, j - 1] = after[:, j] @ steps[:, j]
    u = before[:, n_p]

    powers = [np.broadcast_to(ID4, u.shape)]
    for _ in range(n):
        powers.append(u @ powers[-1])
    w = powers[n]
    fid = np.real(np.einsum("jj,tjk,kk,tjk->t", IZ, w, SZ, np.conj(w)))
    f = float(fid @ weights)

    # d f = 2 Re Tr[dU M],  M = sum_k U^k (Sz W^dagger Iz) U^(n-1-k)
    x = SZ @ np.conj(np.swapaxes(w, -1, -2)) @ IZ
    m = np.zeros_like(u)
    for k in range(n):
        m += powers[k] @ x @ powers[n - 1 - k]

    q = before[:, :n_p] @ m[:, None] @ after            # (T, P, 4, 4)
    y = vh @ q @ v
    g = _divided_differences(lam, dt)
    gy = g * np.swapaxes(y, -1, -2)                     # G_kl Y_lk
    xa = vh @ ops[None] @ v
    xp = vh @ dops[None] @ v
    da = 2 * np.real(np.einsum("tpkl,tpkl->tp", xa, gy)) * scales[:, None]
    dp = 2 * np.real(np.einsum("tpkl,tpkl->tp", xp, gy)) * (scales[:, None] * amps[None, :])
    return f, weights @ da, weights @ dp


def gradient(c: ControlVector, cfg: OptimizationConfig) -> ControlVector:
    """Exact gradient, returned in ControlVector layout (d/d amplitude, d/d phase)."""
    _, ga, gp = objective_and_gradient(c, cfg)
    return ControlVector(ga, gp)


@dataclass
class OptimizationResult:
    waveform: Waveform
    controls: ControlVector
    objective: float
    iterations: int
    converged: bool
    reason: str
    seed: int
    history: list = field(default_factory=list)

    def report(self) -> dict:
        return {
            "name": self.waveform.name,
            "seed": self.seed,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "reason": self.reason,
            "n_pulses": len(self.waveform),
            "period_ns": self.waveform.period * 1e9,
        }


def optimize(cfg: OptimizationConfig, initial: ControlVector | None = None,
             name: str | None = None) -> OptimizationResult:
    """Maximise the replicated transfer with bound-constrained L-BFGS.

    The start is drawn from ``cfg.seed`` unless ``initial`` is given. Running
    out of iterations is reported through ``converged=False``, not raised.
    """
    rng = np.random.default_rng(cfg.seed)
    c0 = initial if initial is not None else ControlVector.random(cfg.n_pulses, cfg.max_amp, rng)
    c0 = c0.projected(cfg.max_amp)
    p = cfg.n_pulses
    x0 = np.concatenate([c0.amplitudes / cfg.max_amp, c0.phases])
    history = []

    def split(x):
        return ControlVector(x[:p] * cfg.max_amp, x[p:])

    def fun(x):
        f, ga, gp = objective_and_gradient(split(x), cfg)
        return -f, -np.concatenate([ga * cfg.max_amp, gp])

    def callback(intermediate_result):
        history.append(-float(intermediate_result.fun))

    bounds = [(0.0, 1.0)] * p + [(None, None)] * p
    res = scipy.optimize.minimize(
        fun, x0, jac=True, method="L-BFGS-B", bounds=bounds, callback=callback,
        options={"maxiter": cfg.max_iters, "gtol": cfg.grad_tol, "ftol": 1e-13, "maxcor": 20},
    )
    controls = split(np.asarray(res.x)).projected(cfg.max_amp)
    value = objective(controls, cfg)
    name = name or f"opt-seed{cfg.seed}"
    meta = {
        "modulation_MHz": f"{1e-6 / (p * cfg.dt):.3f}",
        "max_amp_MHz": f"{cfg.max_amp / MHZ:.3f}",
        "provenance": f"loopdnp.optimize seed={cfg.seed} n_rep={cfg.n_rep} objective={value:.6f}",
    }
    w = controls.to_waveform(name, cfg.dt, meta)
    reason = res.message if isinstance(res.message, str) else res.message.decode()
    log.info("seed %d: objective %.6f after %d iterations (%s)", cfg.seed, value, res.nit, reason)
    return OptimizationResult(w, controls, value, int(res.nit), bool(res.success), reason,
                              cfg.seed, history)


def _run_seed(args):
    cfg, seed = args
    from dataclasses import replace
    return optimize(replace(cfg, seed=seed))


def optimize_multistart(cfg: OptimizationConfig, seeds, workers: int = 1):
    """Independent runs for each seed; returns (best, all results in seed order).

    Ties in the objective go to the earlier seed.
    """
    seeds = list(range(cfg.seed, cfg.seed + seeds)) if isinstance(seeds, int) else list(seeds)
    jobs = [(cfg, s) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_seed, jobs))
    else:
        results = [_run_seed(j) for j in jobs]
    best = max(results, key=lambda r: (r.objective, -seeds.index(r.seed)))
    return best, results

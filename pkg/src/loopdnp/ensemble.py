"""Powder and microwave-inhomogeneity averaging.

Only the polar angle beta between the e-H vector and the field enters the
couplings (A, B), so a one-dimensional Gauss-Legendre rule in cos(beta)
integrates the powder average exactly for polynomial integrands.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constants import PROTON_LARMOR_X_BAND
from .propagation import fidelity_iz, period_propagators, replicate
from .spin import Waveform, crystallite_couplings, static_hamiltonian

__all__ = [
    "InhomogeneityEnsemble", "PowderGrid", "paper_ensemble", "nominal_ensemble",
    "make_powder_grid", "averaged_fidelity", "target_fidelities", "thread_count",
]

THREADS_ENV = "LOOPDNP_THREADS"

B1_SCALES = (0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.00, 1.05)
# published weights, sum 1.001
B1_WEIGHTS = (0.079, 0.083, 0.088, 0.094, 0.103, 0.115, 0.135, 0.209, 0.095)


def thread_count(threads: int | None = None) -> int:
    """Worker count: explicit argument, else $LOOPDNP_THREADS, else 1."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class InhomogeneityEnsemble:
    """B1 amplitude multipliers with probability weights (normalised on construction)."""

    scales: tuple
    weights: tuple
    raw_weights: tuple = ()

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        raw = tuple(float(w) for w in self.weights)
        if len(scales) == 0 or len(scales) != len(raw):
            raise ValueError("scales and weights must be non-empty and equal length")
        if any(w <= 0 for w in raw):
            raise ValueError("weights must be positive")
        total = float(np.sum(raw))
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "weights", tuple(w / total for w in raw))
        object.__setattr__(self, "raw_weights", tuple(self.raw_weights) or raw)

    def __len__(self):
        return len(self.scales)

    def to_json(self) -> str:
        return json.dumps({"scales": list(self.scales), "weights": list(self.raw_weights)})

    @classmethod
    def from_json(cls, text: str) -> "InhomogeneityEnsemble":
        d = json.loads(text)
        return cls(d["scales"], d["weights"])


def paper_ensemble() -> InhomogeneityEnsemble:
    """Nine-member power-model B1 distribution used for the LOOP optimisations."""
    return InhomogeneityEnsemble(B1_SCALES, B1_WEIGHTS)


def nominal_ensemble() -> InhomogeneityEnsemble:
    return InhomogeneityEnsemble((1.0,), (1.0,))


@dataclass(frozen=True)
class PowderGrid:
    betas: tuple
    weights: tuple

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        weights = np.asarray(self.weights, dtype=float)
        if len(betas) == 0 or len(betas) != len(weights):
            raise ValueError("betas and weights must be non-empty and equal length")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "weights", tuple(weights / weights.sum()))

    def __len__(self):
        return len(self.betas)

    @classmethod
    def single(cls, beta: float) -> "PowderGrid":
        return cls((beta,), (1.0,))

    def to_json(self) -> str:
        return json.dumps({"betas": list(self.betas), "weights": list(self.weights)})

    @classmethod
    def from_json(cls, text: str) -> "PowderGrid":
        d = json.loads(text)
        return cls(d["betas"], d["weights"])


def make_powder_grid(n: int = 64, hemisphere: bool = True) -> PowderGrid:
    """Gauss-Legendre nodes in cos(beta) on [0, 1] (or [-1, 1] with ``hemisphere=False``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x, w = np.polynomial.legendre.leggauss(n)
    lo = 0.0 if hemisphere else -1.0
    u = lo + (x + 1) * (1 - lo) / 2
    return PowderGrid(tuple(np.arccos(u)), tuple(w))


def _chunks(n, parts):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def target_fidelities(w: Waveform, h0, scales, n_reps, threads: int | None = None):
    """<Iz> for each drift Hamiltonian / B1 scale pair, for each repetition count.

    Returns an array of shape (len(n_reps), M). Work is split over threads by
    target; each target is computed independently so the result does not
    depend on the partitioning.
    """
    h0 = np.asarray(h0)
    scales = np.broadcast_to(np.asarray(scales, dtype=float), h0.shape[:-2])
    n_reps = [int(n) for n in n_reps]
    amps, phases, durs = w.amplitudes, w.phases, w.durations

    def work(sl):
        u = period_propagators(h0[sl], amps, phases, durs, scales[sl])
        out = {}
        power, done = None, 0
        for n in sorted(set(n_reps)):
            step = replicate(u, n - done)
            power = step if power is None else step @ power
            done = n
            out[n] = fidelity_iz(power)
        return np.stack([out[n] for n in n_reps])

    workers = thread_count(threads)
    parts = _chunks(h0.shape[0], workers)
    if workers == 1 or len(parts) == 1:
        results = [work(sl) for sl in parts]
    else:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, parts))
    return np.concatenate(results, axis=1)


def powder_targets(offsets, T, grid: PowderGrid, ensemble: InhomogeneityEnsemble,
                   larmor_n: float = PROTON_LARMOR_X_BAND):
    """Flattened (offset, orientation, scale) targets and their joint weights.

    Returns ``h0`` of shape (n_off * n_orient * n_scale, 4, 4), the matching
    scales, and the orientation x scale weight vector (length n_orient * n_scale).
    """
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    a, b = crystallite_couplings(T, np.asarray(grid.betas))
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    n_o, n_b, n_s = len(offsets), len(a), len(ensemble)
    off_g = np.repeat(offsets, n_b * n_s)
    a_g = np.tile(np.repeat(a, n_s), n_o)
    b_g = np.tile(np.repeat(b, n_s), n_o)
    s_g = np.tile(np.asarray(ensemble.scales), n_o * n_b)
    h0 = static_hamiltonian(off_g, larmor_n, a_g, b_g)
    weights = np.outer(grid.weights, ensemble.weights).ravel()
    return h0, s_g, weights


def averaged_fidelities(w: Waveform, offsets, T, grid: PowderGrid,
                        ensemble: InhomogeneityEnsemble, n_reps,
                        larmor_n: float = PROTON_LARMOR_X_BAND, threads=None):
    """Powder/ensemble-averaged <Iz>, shape (len(n_reps), len(offsets))."""
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    h0, scales, weights = powder_targets(offsets, T, grid, ensemble, larmor_n)
    f = target_fidelities(w, h0, scales, n_reps, threads)
    f = f.reshape(len(list(n_reps)), len(offsets), len(weights))
    # fixed-order reduction over (orientation, scale)
    return np.einsum("rok,k->ro", f, weights)


def averaged_fidelity(w: Waveform, offset: float, T: float, grid: PowderGrid,
                      ensemble: InhomogeneityEnsemble, n_rep: int,
                      larmor_n: float = PROTON_LARMOR_X_BAND, threads=None) -> float:
    """Orientation- and B1-weighted <Iz> after ``n_rep`` periods at one offset."""
    return float(averaged_fidelities(w, [offset], T, grid, ensemble, [n_rep],
                                     larmor_n, threads)[0, 0])

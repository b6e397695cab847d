"""Transfer profiles over electron offset and B1 scale, and contact-time selection."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from .constants import MHZ, NS, PROTON_LARMOR_X_BAND
from .ensemble import (InhomogeneityEnsemble, PowderGrid, averaged_fidelities,
                       make_powder_grid, nominal_ensemble)
from .spin import Waveform

__all__ = [
    "TransferProfile", "scan_2d", "trace_1d", "powder_traces", "optimal_contact",
    "ContactChoice", "bandwidth", "parse_range",
]

DEFAULT_BAND = (-30.0 * MHZ, 30.0 * MHZ)
DEFAULT_N_MAX = 40


def parse_range(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive of stop) or a single number."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"invalid range {text!r}")
    n = int(round((stop - start) / step)) + 1
    return start + step * np.arange(n)


@dataclass
class TransferProfile:
    """Averaged <Iz> on an offset (rad/s) x B1-scale grid."""

    offset_axis: np.ndarray
    scale_axis: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.offset_axis = np.asarray(self.offset_axis, dtype=float)
        self.scale_axis = np.asarray(self.scale_axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.offset_axis), len(self.scale_axis)):
            raise ValueError("values shape does not match the axes")
        if not np.all(np.isfinite(self.values)) or np.any(np.abs(self.values) > 1 + 1e-9):
            raise ValueError("profile values must be finite and within [-1, 1]")

    def to_csv(self) -> str:
        out = io.StringIO()
        for k, v in self.metadata.items():
            out.write(f"# {k}={v}\n")
        out.write("offset_MHz,scale,iz\n")
        for i, off in enumerate(self.offset_axis):
            for j, s in enumerate(self.scale_axis):
                out.write(f"{off / MHZ:.6f},{s:.6f},{self.values[i, j]:.10f}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TransferProfile":
        meta = {}
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line and not line.startswith("offset_MHz"):
                rows.append([float(x) for x in line.split(",")])
        data = np.array(rows)
        offsets = np.unique(data[:, 0])
        scales = np.unique(data[:, 1])
        values = data[:, 2].reshape(len(offsets), len(scales))
        return cls(offsets * MHZ, scales, values, meta)


def _metadata(w, T, grid, ensemble, n_rep, larmor_n):
    return {
        "waveform": w.name,
        "T_MHz": f"{T / MHZ:.6g}",
        "larmor_MHz": f"{larmor_n / MHZ:.6g}",
        "n_rep": str(n_rep),
        "t_contact_ns": f"{n_rep * w.period / NS:.6g}",
        "powder_grid": f"gauss-legendre-cos-beta n={len(grid)}",
        "ensemble": "none" if ensemble is None else ensemble.to_json(),
    }


def scan_2d(w: Waveform, offsets, scales, T: float, grid: PowderGrid | None = None,
            ensemble: InhomogeneityEnsemble | None = None, n_rep: int = 1,
            larmor_n: float = PROTON_LARMOR_X_BAND, threads=None) -> TransferProfile:
    """Powder-averaged <Iz> at every (offset, B1 scale) pair.

    With an ``ensemble`` each scale-axis point is further averaged over the
    ensemble members (their multipliers compound with the axis value).
    """
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    if offsets.size == 0 or scales.size == 0:
        raise ValueError("scan axes must be non-empty")
    grid = grid or make_powder_grid()
    base = ensemble or nominal_ensemble()
    values = np.empty((len(offsets), len(scales)))
    for j, s in enumerate(scales):
        ens = InhomogeneityEnsemble(tuple(s * x for x in base.scales), base.raw_weights)
        values[:, j] = averaged_fidelities(w, offsets, T, grid, ens, [n_rep],
                                           larmor_n, threads)[0]
    return TransferProfile(offsets, scales, values,
                           _metadata(w, T, grid, ensemble, n_rep, larmor_n))


def trace_1d(w: Waveform, offsets, T: float, grid: PowderGrid | None = None,
             n_rep: int = 1, ensemble: InhomogeneityEnsemble | None = None,
             larmor_n: float = PROTON_LARMOR_X_BAND, threads=None) -> TransferProfile:
    """Offset profile at the nominal amplitude (single scale 1.0)."""
    return scan_2d(w, offsets, [1.0], T, grid, ensemble, n_rep, larmor_n, threads)


def powder_traces(w: Waveform, offsets, T: float, grid: PowderGrid | None = None,
                  n_max: int = DEFAULT_N_MAX, ensemble: InhomogeneityEnsemble | None = None,
                  larmor_n: float = PROTON_LARMOR_X_BAND, threads=None) -> np.ndarray:
    """Averaged <Iz> for n_rep = 1..n_max, shape (n_max, len(offsets))."""
    grid = grid or make_powder_grid()
    return averaged_fidelities(w, offsets, T, grid, ensemble or nominal_ensemble(),
                               range(1, n_max + 1), larmor_n, threads)


class ContactChoice(NamedTuple):
    n_rep: int
    t_contact: float  # s
    band_integrals: np.ndarray  # per n_rep = 1..n_max, in rad/s units of offset


def optimal_contact(w: Waveform, T: float, grid: PowderGrid | None = None,
                    band=DEFAULT_BAND, n_max: int = DEFAULT_N_MAX, step: float = 1.0 * MHZ,
                    ensemble: InhomogeneityEnsemble | None = None,
                    larmor_n: float = PROTON_LARMOR_X_BAND, threads=None) -> ContactChoice:
    """Repetition count maximising the band-integrated averaged transfer.

    Integration is trapezoidal on a ``step``-spaced offset grid; ties go to
    the smaller repetition count.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    lo, hi = band
    n = int(round((hi - lo) / step)) + 1
    offsets = lo + step * np.arange(n)
    traces = powder_traces(w, offsets, T, grid, n_max, ensemble, larmor_n, threads)
    integrals = trapezoid(traces, offsets, axis=1)
    best = int(np.argmax(integrals)) + 1
    return ContactChoice(best, best * w.period, integrals)


def bandwidth(offsets, values, threshold: float = 0.5, center: float = 0.0) -> float:
    """Width of the contiguous region around ``center`` with value >= threshold * max.

    Returned in the units of ``offsets``; zero when the centre point itself
    is below threshold.
    """
    offsets = np.asarray(offsets, dtype=float)
    values = np.asarray(values, dtype=float)
    level = threshold * values.max()
    i0 = int(np.argmin(np.abs(offsets - center)))
    if values[i0] < level:
        return 0.0
    lo = hi = i0
    while lo > 0 and values[lo - 1] >= level:
        lo -= 1
    while hi < len(values) - 1 and values[hi + 1] >= level:
        hi += 1
    return float(offsets[hi] - offsets[lo])

"""Two-parameter exponential fits for DNP buildup and relaxation data.

Models (amplitude a, time constant tau):

    buildup     a (1 - exp(-t / tau))
    invrec      a (1 - 2 exp(-t / tau))
    decay       a exp(-t / tau)

Fits run Levenberg-Marquardt on data normalised to unit time span and unit
peak value, starting from a log-linearised estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

__all__ = ["ExpFit", "FitError", "fit_buildup", "fit_inversion_recovery", "fit_decay",
           "fit_model", "MODELS", "read_xy_csv"]


class FitError(ValueError):
    """Data cannot determine the model parameters."""


@dataclass(frozen=True)
class ExpFit:
    model: str
    amplitude: float
    time_constant: float
    residual_rms: float

    def __post_init__(self):
        if not self.time_constant > 0:
            raise FitError(f"non-positive time constant {self.time_constant}")

    def predict(self, t):
        return MODELS[self.model][0](np.asarray(t, dtype=float), self.amplitude, self.time_constant)


def _buildup(t, a, tau):
    return a * (1 - np.exp(-t / tau))


def _buildup_jac(t, a, tau):
    e = np.exp(-t / tau)
    return np.column_stack([1 - e, -a * e * t / tau**2])


def _invrec(t, a, tau):
    return a * (1 - 2 * np.exp(-t / tau))


def _invrec_jac(t, a, tau):
    e = np.exp(-t / tau)
    return np.column_stack([1 - 2 * e, -2 * a * e * t / tau**2])


def _decay(t, a, tau):
    return a * np.exp(-t / tau)


def _decay_jac(t, a, tau):
    e = np.exp(-t / tau)
    return np.column_stack([e, a * e * t / tau**2])


def _linear_guess(t, z):
    """Slope and intercept of z ~ t; falls back to a flat line for bad input."""
    ok = np.isfinite(z)
    if ok.sum() < 2 or np.ptp(t[ok]) == 0:
        return -1.0, float(np.mean(z[ok])) if ok.any() else 0.0
    slope, intercept = np.polyfit(t[ok], z[ok], 1)
    return float(slope), float(intercept)


def _guess_buildup(t, y):
    peak = y[np.argmax(np.abs(y))]
    a = 1.05 * peak
    slope, _ = _linear_guess(t, np.log(np.clip(1 - y / a, 1e-12, None)))
    return a, -1.0 / slope if slope < 0 else 1.0


def _guess_invrec(t, y):
    a = 1.05 * y[np.argmax(t)] if y[np.argmax(t)] != 0 else 1.0
    slope, _ = _linear_guess(t, np.log(np.clip((1 - y / a) / 2, 1e-12, None)))
    return a, -1.0 / slope if slope < 0 else 1.0


def _guess_decay(t, y):
    sign = 1.0 if np.sum(y) >= 0 else -1.0
    slope, intercept = _linear_guess(t, np.log(np.clip(sign * y, 1e-12, None)))
    return sign * math.exp(intercept), -1.0 / slope if slope < 0 else 1.0


MODELS = {
    "buildup": (_buildup, _buildup_jac, _guess_buildup),
    "invrec": (_invrec, _invrec_jac, _guess_invrec),
    "decay": (_decay, _decay_jac, _guess_decay),
}


def fit_model(model: str, times, values) -> ExpFit:
    """Least-squares fit of one of :data:`MODELS` to (times, values)."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    f, jac, guess = MODELS[model]
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-D arrays of equal length")
    if len(t) < 2:
        raise FitError("need at least two points")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite data")
    if np.ptp(y) == 0:
        raise FitError("degenerate data: all values equal")

    t_scale = float(t.max() - min(t.min(), 0.0)) or 1.0
    y_scale = float(np.abs(y).max())
    tn, yn = t / t_scale, y / y_scale
    a0, tau0 = guess(tn, yn)
    tau0 = min(max(tau0, 1e-3), 1e3)

    def residual(p):
        return f(tn, p[0], p[1]) - yn

    def jacobian(p):
        return jac(tn, p[0], p[1])

    try:
        res = scipy.optimize.least_squares(residual, [a0, tau0], jac=jacobian, method="lm",
                                           xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise FitError(f"fit failed: {exc}") from None
    a, tau = res.x
    if not (np.isfinite(a) and np.isfinite(tau)) or tau <= 0:
        raise FitError(f"fit did not converge to a positive time constant ({res.message})")
    rms = float(np.sqrt(np.mean(res.fun**2))) * y_scale
    return ExpFit(model, float(a * y_scale), float(tau * t_scale), rms)


def fit_buildup(times, values) -> ExpFit:
    """Enhancement buildup a (1 - exp(-t/T_B))."""
    return fit_model("buildup", times, values)


def fit_inversion_recovery(times, values) -> ExpFit:
    """Inversion recovery a (1 - 2 exp(-t/T1))."""
    return fit_model("invrec", times, values)


def fit_decay(times, values) -> ExpFit:
    """Polarisation decay a exp(-t/T1)."""
    return fit_model("decay", times, values)


def read_xy_csv(text: str):
    """Two-column ``t_s,value`` CSV; ``#`` comments and one header line allowed."""
    t, y = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            t_val, y_val = float(cells[0]), float(cells[1])
        except (ValueError, IndexError):
            if not t:
                continue  # header
            raise ValueError(f"line {lineno}: expected two numeric columns") from None
        t.append(t_val)
        y.append(y_val)
    return np.array(t), np.array(y)

"""Exponential fits for DNP buildup and relaxation curves."""

# %%
from pathlib import Path

import numpy as np

from loopdnp.fitting import fit_decay, fit_inversion_recovery, fit_model, read_xy_csv

# %% A noisy buildup curve bundled with the demos.
t, y = read_xy_csv((Path(__file__).parent / "data" / "buildup.csv").read_text())
fit = fit_model("buildup", t, y)
print(f"eps_max {fit.amplitude:.1f}, T_B {fit.time_constant:.2f} s, rms {fit.residual_rms:.2f}")

# %% Electron inversion recovery on a millisecond scale.
rng = np.random.default_rng(1)
t = np.linspace(0, 10e-3, 25)
y = 1 - 2 * np.exp(-t / 1.7e-3) + rng.normal(0, 0.01, t.size)
fit = fit_inversion_recovery(t, y)
print(f"T1e {fit.time_constant * 1e3:.3f} ms")

# %% Nuclear polarization decay.
t = np.linspace(0, 100, 25)
y = 328 * np.exp(-t / 22.4) + rng.normal(0, 3.28, t.size)
print(f"T1n {fit_decay(t, y).time_constant:.2f} s")

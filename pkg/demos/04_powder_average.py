"""Powder and B1-inhomogeneity averaging."""

# %%
import numpy as np

from loopdnp.constants import MHZ
from loopdnp.ensemble import averaged_fidelity, make_powder_grid, nominal_ensemble, paper_ensemble
from loopdnp.waveform_io import load_waveform

w = load_waveform("corpus:LOOP-2")
T = 0.8676 * MHZ

# %% Gauss-Legendre nodes in cos(beta) over a hemisphere.
grid = make_powder_grid(64)
print("nodes", len(grid.betas), " weight sum", round(float(np.sum(grid.weights)), 12))

# %% Convergence of the average with the grid size.
for n in (8, 16, 32, 64):
    v = averaged_fidelity(w, 0.0, T, make_powder_grid(n), nominal_ensemble(), 14)
    print(f"n = {n:2d}   <Iz> = {v:.6f}")

# %% Including the microwave amplitude distribution.
ens = paper_ensemble()
print("scales", ens.scales)
print("with ensemble:", round(averaged_fidelity(w, 0.0, T, grid, ens, 14), 6))

# %% Thread count changes speed only, never the numbers.
a = averaged_fidelity(w, 5 * MHZ, T, grid, ens, 14, threads=1)
b = averaged_fidelity(w, 5 * MHZ, T, grid, ens, 14, threads=4)
print("identical across threads:", a == b)

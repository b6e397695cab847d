"""Two-spin Hamiltonian and orientation-dependent couplings."""

# %%
import numpy as np

from loopdnp.constants import MHZ, NS, PROTON_LARMOR_X_BAND, to_mhz
from loopdnp.spin import (SX, SY, SZ, Pulse, SpinSystem, build_hamiltonian,
                          crystallite_couplings, dipolar_constant_angstrom)

# %% Operators live in the product basis |S I>, electron first.
print("[Sx, Sy] = i Sz:", np.allclose(SX @ SY - SY @ SX, 1j * SZ))

# %% Point-dipole constant for a 4.5 A electron-proton distance.
T = dipolar_constant_angstrom(4.5)
print(f"T/2pi = {to_mhz(T):.4f} MHz")

# %% Secular and pseudo-secular couplings across the powder.
for deg in (0, 30, 54.7356, 90):
    a, b = crystallite_couplings(T, np.radians(deg))
    print(f"beta {deg:7.3f} deg   A {to_mhz(a):+.4f}   B {to_mhz(b):+.4f} MHz")

# %% One pulse on resonance at the working-point couplings.
system = SpinSystem(0.0, PROTON_LARMOR_X_BAND, -0.40 * MHZ, 1.00 * MHZ)
h = build_hamiltonian(system, Pulse(32 * MHZ, 0.0, 5 * NS))
print("Hermitian:", np.allclose(h, h.conj().T))
print("eigenvalues (MHz):", np.round(np.linalg.eigvalsh(h) / MHZ, 4))

"""Propagating a LOOP waveform and watching Sz -> Iz transfer build up."""

# %%
import numpy as np

from loopdnp.constants import MHZ, PROTON_LARMOR_X_BAND
from loopdnp.propagation import fidelity_iz, replicate, sequence_propagator, transfer_trace
from loopdnp.spin import SpinSystem
from loopdnp.waveform_io import load_waveform

w = load_waveform("corpus:LOOP-1")
system = SpinSystem(0.0, PROTON_LARMOR_X_BAND, -0.40 * MHZ, 1.00 * MHZ)
print(f"{w.name}: {len(w)} pulses, period {w.period * 1e9:.0f} ns")

# %% One period is a product of 24 pulse propagators.
u = sequence_propagator(w, system)
print("unitary:", np.allclose(u.conj().T @ u, np.eye(4)))

# %% Repeating the period: U^n by repeated squaring.
for n in (1, 5, 10, 20, 40):
    print(f"n = {n:3d}   <Iz> = {fidelity_iz(replicate(u, n)):+.4f}")

# %% The whole trace at once, first local maximum.
trace = transfer_trace(w, system, 60)
v = trace.values
first = next(i for i in range(1, len(v) - 1) if v[i] >= v[i - 1] and v[i] > v[i + 1])
print(f"first maximum at n = {first + 1}, t = {trace.times[first] * 1e6:.2f} us, "
      f"value {v[first]:.3f}")

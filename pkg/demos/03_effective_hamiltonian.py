"""Effective Hamiltonian of one period and the resonance condition."""

# %%
import math

from loopdnp.constants import MHZ, PROTON_LARMOR_X_BAND
from loopdnp.effective import (effective_hamiltonian, electron_effective_field,
                               resonance_match, two_level_model)
from loopdnp.propagation import sequence_propagator
from loopdnp.spin import SpinSystem
from loopdnp.waveform_io import corpus_names, load_waveform

system = SpinSystem(0.0, PROTON_LARMOR_X_BAND, -0.40 * MHZ, 1.00 * MHZ)

# %% Required effective fields for the three modulation frequencies.
for tau_ns in (120, 125, 150):
    wm = 2 * math.pi / (tau_ns * 1e-9)
    rep = resonance_match(PROTON_LARMOR_X_BAND, wm)
    print(f"tau_m {tau_ns} ns: k_I = {rep.k_I}, |w_eff| = {abs(rep.omega_eff_required) / MHZ:.3f} MHz")

# %% Electron-only rotation of each corpus waveform. The field magnitude is
# matched to the nearest harmonic; the axis shows how far from a pure z
# rotation each sequence is.
for name in corpus_names():
    w = load_waveform(f"corpus:{name}")
    f = electron_effective_field(w)
    rep = resonance_match(PROTON_LARMOR_X_BAND, 2 * math.pi / w.period, f.magnitude, signed=False)
    print(f"{name}: field {f.magnitude / MHZ:+.3f} MHz, axis z {f.axis[2]:+.3f}, "
          f"k_I {rep.k_I}, required {abs(rep.omega_eff_required) / MHZ:.3f} MHz")

# %% Full two-spin effective Hamiltonian and its two-level reduction.
w = load_waveform("corpus:LOOP-1")
h = effective_hamiltonian(sequence_propagator(w, system), w.period)
model = two_level_model(h)
print(f"ZQ depth {model.zq_depth:.3f}, DQ depth {model.dq_depth:.5f}")
print(f"predicted <Iz> after 20 periods: {model.predict(20 * w.period):.3f}")

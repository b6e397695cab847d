"""Reading, validating and writing waveform files."""

# %%
import numpy as np

from loopdnp.constants import MHZ, NS
from loopdnp.spin import Waveform
from loopdnp.waveform_io import (corpus_names, corpus_text, format_waveform, load_waveform,
                                 parse_waveform, validate_waveform)

# %% The bundled corpus.
for name in corpus_names():
    r = validate_waveform(load_waveform(f"corpus:{name}"))
    print(f"{name}: {r.n_pulses} pulses, {r.period_ns:.0f} ns, {r.modulation_mhz:.3f} MHz, ok={r.ok}")

print(corpus_text("LOOP-1")[:200])

# %% Round trip of a new waveform; values are kept to three decimals.
rng = np.random.default_rng(0)
w = Waveform.from_arrays("random", rng.uniform(0, 30, 8) * MHZ, rng.uniform(-3, 3, 8), 5 * NS)
text = format_waveform(w)
print(text)
print("stable after one round trip:", format_waveform(parse_waveform(text)) == text)

# %% Validation lists every problem rather than stopping at the first.
bad = Waveform.from_arrays("hot", [10 * MHZ, 40 * MHZ], [0.0, 5.0], 5 * NS)
print(validate_waveform(bad).to_text())

"""Offset profiles, contact time and bandwidth."""

# %%
from loopdnp.constants import MHZ
from loopdnp.ensemble import make_powder_grid
from loopdnp.scans import bandwidth, optimal_contact, parse_range, scan_2d, trace_1d
from loopdnp.waveform_io import corpus_names, load_waveform

T = 0.8676 * MHZ
grid = make_powder_grid(64)
offsets = parse_range("-100:100:1")

# %% Contact time from the band-integrated transfer, then the 1D trace.
for name in corpus_names():
    w = load_waveform(f"corpus:{name}")
    contact = optimal_contact(w, T, grid)
    prof = trace_1d(w, offsets * MHZ, T, grid, n_rep=contact.n_rep)
    peak = prof.values.max()
    print(f"{name}: n_rep {contact.n_rep:2d} ({contact.t_contact * 1e6:.2f} us), "
          f"peak {peak:.3f}, width {bandwidth(offsets, prof.values[:, 0]):.0f} MHz")

# %% A coarse offset x amplitude map, written as CSV.
w = load_waveform("corpus:LOOP-1")
prof = scan_2d(w, parse_range("-60:60:20") * MHZ, parse_range("0.6:1.2:0.2"), T,
               make_powder_grid(16), n_rep=7)
print(prof.to_csv())

"""Simulation and optimal-control design of periodic longitudinal pulsed-DNP sequences."""

from .constants import MHZ, NS
from .spin import (SpinSystem, Pulse, Waveform, build_hamiltonian, dipolar_constant,
                   crystallite_couplings)
from .propagation import (pulse_propagator, sequence_propagator, replicate, fidelity_iz,
                          transfer_trace, TransferTrace)
from .effective import (effective_hamiltonian, electron_effective_field, resonance_match,
                        zq_dq_projection, EffectiveHamiltonian, ResonanceReport)
from .ensemble import (InhomogeneityEnsemble, PowderGrid, paper_ensemble, nominal_ensemble,
                       make_powder_grid, averaged_fidelity)
from .waveform_io import (parse_waveform, format_waveform, load_waveform, validate_waveform,
                          corpus_names)

__version__ = "0.1.0"

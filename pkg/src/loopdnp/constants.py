"""Physical constants and unit conversions.

Values are CODATA 2018 (as distributed with scipy.constants 1.15), pinned here
so that numerical results do not drift with library updates.
"""

import math

HBAR = 1.054571817e-34  # J s
MU0 = 1.25663706212e-6  # N A^-2
GAMMA_E = 1.76085963023e11  # rad s^-1 T^-1, free electron (magnitude)
GAMMA_H = 2.6752218744e8  # rad s^-1 T^-1, proton

MHZ = 2.0 * math.pi * 1e6  # rad/s per MHz
NS = 1e-9
ANGSTROM = 1e-10

#: Default proton Larmor frequency (rad/s) at ~0.35 T, rotating-frame sign.
PROTON_LARMOR_X_BAND = -14.8 * MHZ
#: Default peak microwave amplitude (rad/s).
MAX_AMPLITUDE = 32.0 * MHZ
#: Default pulse duration (s).
PULSE_DT = 5.0 * NS


def to_mhz(omega):
    """Angular frequency (rad/s) to MHz."""
    return omega / MHZ


def from_mhz(nu):
    """MHz to angular frequency (rad/s)."""
    return nu * MHZ

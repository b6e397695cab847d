import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from loopdnp.constants import MHZ, NS, PROTON_LARMOR_X_BAND
from loopdnp.effective import (DQ_X, DQ_Y, ZQ_X, ZQ_Y, BranchWarning,
                               effective_hamiltonian, electron_effective_field,
                               resonance_match, rotation_axis_angle, two_level_model,
                               zq_dq_projection)
from loopdnp.propagation import sequence_propagator, transfer_trace
from loopdnp.spin import ID4, SZ, SpinSystem, Waveform
from loopdnp.waveform_io import corpus_names, load_waveform

WORKING_POINT = SpinSystem(0.0, PROTON_LARMOR_X_BAND, -0.40 * MHZ, 1.00 * MHZ)
LARMOR = PROTON_LARMOR_X_BAND


def test_identity_gives_zero():
    h = effective_hamiltonian(ID4, 100 * NS)
    assert np.allclose(h.h_eff, 0)
    assert all(abs(c) < 1e-6 for c in h.coefficients.values())


def test_diagonal_case():
    w, tau = 3 * MHZ, 120 * NS
    h = effective_hamiltonian(scipy.linalg.expm(-1j * w * tau * SZ), tau)
    assert h.coefficients["Sz"] == pytest.approx(w, rel=1e-10)
    others = [abs(v) for k, v in h.coefficients.items() if k != "Sz"]
    assert max(others) < 1e-6 * w
    assert not h.branch_ambiguous


def test_round_trip_and_reconstruction():
    for name in corpus_names():
        w = load_waveform(f"corpus:{name}")
        u = sequence_propagator(w, WORKING_POINT)
        h = effective_hamiltonian(u, w.period)
        assert not h.branch_ambiguous
        assert np.linalg.norm(scipy.linalg.expm(-1j * h.h_eff * w.period) - u) < 1e-9
        assert np.allclose(h.reconstruct(), h.h_eff, atol=1e-6)
        assert np.allclose(h.h_eff, h.h_eff.conj().T)


def test_branch_warning_flag():
    tau = 1e-6
    u = scipy.linalg.expm(-1j * (2 * math.pi / tau) * tau * SZ)  # eigenphases +-pi
    h = effective_hamiltonian(u, tau)
    assert h.branch_ambiguous
    with pytest.raises(ValueError):
        effective_hamiltonian(ID4, 0.0)


def test_rotation_axis_angle():
    n = np.array([1.0, 2.0, 2.0]) / 3
    theta = 1.1
    sig = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    u = scipy.linalg.expm(-0.5j * theta * sum(a * s for a, s in zip(n, sig)))
    angle, axis = rotation_axis_angle(np.exp(0.3j) * u)
    assert angle == pytest.approx(theta)
    assert np.allclose(axis, n)
    # -U is the same rotation
    angle2, axis2 = rotation_axis_angle(-u)
    assert angle2 == pytest.approx(theta) and np.allclose(axis2, n)


def test_free_precession_field():
    tau = 120 * NS
    w = Waveform.from_arrays("free", np.zeros(24), np.zeros(24), 5 * NS)
    for nu in (1.0, -2.5, 5.0):
        f = electron_effective_field(w, nu * MHZ)
        folded = (nu * MHZ * tau + math.pi) % (2 * math.pi) - math.pi
        assert abs(f.magnitude) == pytest.approx(abs(folded) / tau, rel=1e-9)
        assert abs(f.axis[2]) == pytest.approx(1.0)


def test_pi_rotation_warns():
    w = Waveform.from_arrays("pi", [math.pi / (10 * NS)], [0.0], 10 * NS)
    with pytest.warns(BranchWarning):
        electron_effective_field(w)


def test_loop1_field_near_resonance():
    w = load_waveform("corpus:LOOP-1")
    f = electron_effective_field(w)
    assert abs(f.magnitude) / MHZ == pytest.approx(1.867, rel=0.10)


def test_25_pulse_loop_field():
    # the 25-pulse waveform (8.0 MHz modulation) realises the 1.200 MHz solution
    w = load_waveform("corpus:LOOP-4")
    assert len(w) == 25 and w.period == pytest.approx(125 * NS)
    assert abs(electron_effective_field(w).magnitude) / MHZ == pytest.approx(1.200, rel=0.10)


def test_loop5_field():
    w = load_waveform("corpus:LOOP-5")
    assert abs(electron_effective_field(w).magnitude) / MHZ == pytest.approx(1.467, rel=0.10)


@pytest.mark.parametrize("nu_m, expected", [(25 / 3, 1.867), (8.0, 1.200), (20 / 3, 1.467)])
def test_smallest_required_field(nu_m, expected):
    r = resonance_match(LARMOR, nu_m * MHZ)
    assert round(abs(r.omega_eff_required) / MHZ, 3) == expected
    assert r.k_I == 2


def test_resonance_trivial():
    r = resonance_match(0.0, 8 * MHZ)
    assert r.k_I == 0 and r.omega_eff_required == 0 and r.mismatch == 0
    with pytest.raises(ValueError):
        resonance_match(LARMOR, 0.0)


@given(st.floats(-30, 30), st.floats(1, 20), st.floats(-5, 5), st.integers(-4, 4))
@settings(max_examples=100, deadline=None)
def test_resonance_k_shift_invariance(w0, wm, weff, m):
    w0, wm, weff = w0 * MHZ, wm * MHZ, weff * MHZ
    r1 = resonance_match(w0, wm, weff)
    r2 = resonance_match(w0 + m * wm, wm, weff)
    # skip exact half-integer ties where rounding may pick either neighbour
    frac = (-(w0 + weff) / wm) % 1.0
    if abs(frac - 0.5) > 1e-6:
        assert r2.k_I == r1.k_I - m
        assert r2.mismatch == pytest.approx(r1.mismatch, abs=1e-6 * wm)
    assert r1.mismatch == pytest.approx(w0 + r1.k_I * wm + weff, abs=1e-6)


def test_resonance_unsigned_matching():
    for name in corpus_names():
        w = load_waveform(f"corpus:{name}")
        f = electron_effective_field(w)
        r = resonance_match(LARMOR, w.omega_m, f.magnitude, signed=False)
        assert abs(r.mismatch) <= 0.10 * abs(r.omega_eff_required)


def test_zq_dq_projection_trivial():
    w = 2 * MHZ
    assert zq_dq_projection(w * ZQ_X) == pytest.approx((w, 0.0))
    assert zq_dq_projection(w * ZQ_Y) == pytest.approx((w, 0.0))
    assert zq_dq_projection(w * DQ_X) == pytest.approx((0.0, w))
    assert zq_dq_projection(w * DQ_Y) == pytest.approx((0.0, w))
    assert zq_dq_projection(w * SZ) == (0.0, 0.0)


def test_loop1_zq_dq_amplitude_ratio():
    # literal check on the raw effective Hamiltonian amplitudes
    w = load_waveform("corpus:LOOP-1")
    h = effective_hamiltonian(sequence_propagator(w, WORKING_POINT), w.period)
    zq, dq = zq_dq_projection(h)
    assert max(zq, dq) / min(zq, dq) > 10


@pytest.mark.parametrize("name", corpus_names())
def test_zq_dq_selectivity_in_field_frame(name):
    w = load_waveform(f"corpus:{name}")
    h = effective_hamiltonian(sequence_propagator(w, WORKING_POINT), w.period)
    m = two_level_model(h)
    assert max(m.zq_depth, m.dq_depth) / min(m.zq_depth, m.dq_depth) > 10


def test_two_level_model_exact_toy():
    # constant drive: electron tilted by sin(theta) = 3/5, resonant ZQ flip-flop
    b = 0.2 * MHZ
    tilt = math.atan2(3.0, 4.0)
    sys_ = SpinSystem(-4 * MHZ, -5 * MHZ, 0.0, b)
    w = Waveform.from_arrays("cw", [3 * MHZ], [0.0], 10 * NS)
    m = two_level_model(effective_hamiltonian(sequence_propagator(w, sys_), w.period))
    assert m.zq_amp == pytest.approx(b * math.sin(tilt) / 2, rel=1e-3)
    assert abs(m.tilt_s) == pytest.approx(math.cos(tilt), rel=1e-3)
    tr = transfer_trace(w, sys_, 1000)
    assert np.max(np.abs(m.predict(tr.times) - tr.values)) < 0.02

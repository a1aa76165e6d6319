import dataclasses
import math

import numpy as np
import pytest
import scipy.signal

from slowline.bands import tight_binding
from slowline.dynamics import (DynamicsTrace, Modulation, Protocol,
                               bandedge_oracle, effective_rate,
                               ideal_mirror_oracle, lifetime_1e,
                               revival_onsets, simulate_emission,
                               simulate_emission_quantum, simulate_mirror,
                               simulate_modulated)
from slowline.params import UnitCellParams, ValidationError

CELL = UnitCellParams(c0=353.2e-15, cg=5.05e-15, l0=3.151e-9)
J = tight_binding(CELL)["j_tb"]


# ----------------------------------------------------------------- protocol

def test_protocol_round_trip():
    p = Protocol(omega_interact=3e10, t_max=1e-7, dt_output=2e-10,
                 modulation=Modulation(omega_mod=3.77e9, epsilon=1.5e9),
                 tune_time=5e-9, omega_park=3.1e10)
    q = Protocol.from_dict(p.to_dict())
    assert q.omega_interact == pytest.approx(p.omega_interact, rel=1e-12)
    assert q.omega_park == pytest.approx(p.omega_park, rel=1e-12)
    assert q.modulation.omega_mod == pytest.approx(p.modulation.omega_mod,
                                                   rel=1e-12)
    assert (q.t_max, q.dt_output, q.tune_time) == (p.t_max, p.dt_output,
                                                   p.tune_time)


def test_protocol_validation():
    with pytest.raises(ValidationError):
        Protocol(omega_interact=3e10, t_max=-1.0)
    with pytest.raises(ValidationError):
        Protocol(omega_interact=3e10, t_max=1e-7,
                 initial_excited_population=1.5)
    with pytest.raises(ValidationError, match="t_maxx"):
        Protocol.from_dict({"omega_interact_hz": 5e9, "t_maxx": 1e-7})


def test_modulation_index():
    m = Modulation(omega_mod=2 * math.pi * 600e6, epsilon=2 * math.pi * 240e6)
    assert m.index == pytest.approx(0.4)


def test_trace_csv_round_trip(tmp_path):
    tr = DynamicsTrace(t=np.linspace(0, 1e-7, 11), p_e=np.linspace(1, 0, 11))
    path = tmp_path / "tr.csv"
    tr.to_csv(path)
    assert path.read_text().splitlines()[0] == "t_s,p_e"
    back = DynamicsTrace.from_csv(path)
    np.testing.assert_allclose(back.p_e, tr.p_e, atol=1e-12)


# ------------------------------------------------------------------ oracles

def test_ideal_mirror_exact_before_round_trip():
    gamma, tau = 1e8, 100e-9
    tr = ideal_mirror_oracle(gamma, tau, phase=0.0, t_max=300e-9)
    pre = tr.t < tau
    expected = np.exp(-gamma * tr.t[pre])
    assert np.max(np.abs(tr.p_e[pre] - expected)) < 1e-12


def test_ideal_mirror_constructive_feedback_doubles_rate():
    """In-phase return (phi = 0), short delay: decay rate -> 2 Gamma."""
    gamma, tau = 1e8, 2e-9      # Gamma * tau = 0.2, near-Markovian
    tr = ideal_mirror_oracle(gamma, tau, phase=0.0, t_max=60e-9,
                             dt_output=1e-11)
    m = (tr.t > 2 * tau) & (tr.t < 20e-9)
    rate = effective_rate(DynamicsTrace(t=tr.t[m], p_e=tr.p_e[m]))
    assert rate == pytest.approx(2 * gamma, rel=0.2)


def test_ideal_mirror_destructive_feedback_traps_population():
    """Anti-phase return (phi = pi) freezes the decay (dark state)."""
    gamma, tau = 1e8, 2e-9
    tr_pi = ideal_mirror_oracle(gamma, tau, phase=math.pi, t_max=60e-9,
                                dt_output=1e-11)
    assert tr_pi.p_e[-1] > 0.5
    late = tr_pi.t > 30e-9
    rate = effective_rate(DynamicsTrace(t=tr_pi.t[late], p_e=tr_pi.p_e[late]))
    assert abs(rate) < gamma / 20


def test_bandedge_oracle_fractional_decay():
    """Detuning 0 at the edge: population locks near the bound-state weight
    squared (4/9) and oscillates at the dressed splitting."""
    g = 0.3 * J
    beta = (g**4 / (4 * J)) ** (1.0 / 3.0)
    tr = bandedge_oracle(g, J, CELL.omega0, 0.0, t_max=1.2e-6, dt_output=1e-9)
    late = tr.t > 300e-9
    assert tr.p_e[late].mean() == pytest.approx(4.0 / 9.0, rel=0.10)
    osc = tr.t > 100e-9
    peaks, _ = scipy.signal.find_peaks(tr.p_e[osc], prominence=1e-3)
    spacing = np.median(np.diff(tr.t[osc][peaks]))
    assert spacing == pytest.approx(2 * math.pi / beta, rel=0.25)


def test_bandedge_oracle_far_detuned_stays_excited():
    tr = bandedge_oracle(0.3 * J, J, CELL.omega0, 20 * J, t_max=2e-7,
                         dt_output=1e-9)
    assert tr.p_e[-1] > 0.95


def test_bandedge_oracle_convergence_guard():
    with pytest.raises(ValidationError, match="not converged"):
        bandedge_oracle(0.3 * J, J, CELL.omega0, 0.0, t_max=1e-6,
                        dt_output=1e-9, n_modes=21)


# --------------------------------------------------------------- estimators

def test_lifetime_and_rate_on_pure_exponential():
    gamma = 2e8
    t = np.linspace(0, 50e-9, 501)
    tr = DynamicsTrace(t=t, p_e=np.exp(-gamma * t))
    assert lifetime_1e(tr) == pytest.approx(1.0 / gamma, rel=1e-3)
    assert effective_rate(tr) == pytest.approx(gamma, rel=1e-9)
    assert effective_rate(tr, (10e-9, 40e-9)) == pytest.approx(gamma, rel=1e-9)


def test_lifetime_never_decaying_raises():
    t = np.linspace(0, 1e-7, 11)
    with pytest.raises(ValidationError):
        lifetime_1e(DynamicsTrace(t=t, p_e=np.full(11, 0.9)))


def test_revival_onset_detection():
    t = np.linspace(0, 400e-9, 4001)
    p = np.exp(-1e8 * t)
    bump = 0.05 * np.exp(-((t - 250e-9) / 20e-9) ** 2)
    tr = DynamicsTrace(t=t, p_e=p + bump)
    on = revival_onsets(tr, n_revivals=1, settle_level=0.05, prominence=1e-3)
    assert 200e-9 < on[0] < 250e-9


# ------------------------------------------------------------ full circuit

def test_emission_trace_passive(qubit_spec_nobend, q1, midband):
    tr = simulate_emission(qubit_spec_nobend, q1,
                           Protocol(omega_interact=midband, t_max=3e-8))
    assert tr.p_e[0] == pytest.approx(1.0)
    assert np.all(tr.p_e <= 1.0 + 1e-9)
    assert np.all(tr.p_e >= 0.0)


def test_initial_population_scaling(qubit_spec_nobend, q1, midband):
    tr = simulate_emission(
        qubit_spec_nobend, q1,
        Protocol(omega_interact=midband, t_max=5e-9,
                 initial_excited_population=0.5))
    assert tr.p_e[0] == pytest.approx(0.5)


def test_mirror_requires_open_termination(qubit_spec_nobend, q1, midband):
    with pytest.raises(ValidationError, match="open_mirror"):
        simulate_mirror(qubit_spec_nobend, q1,
                        Protocol(omega_interact=midband, t_max=1e-9))


def test_modulated_requires_modulation(qubit_spec_nobend, q1, midband):
    with pytest.raises(ValidationError, match="modulation"):
        simulate_modulated(qubit_spec_nobend, q1,
                           Protocol(omega_interact=midband, t_max=1e-9))


def test_quantum_matches_classical_short(qubit_spec_nobend, q1, midband):
    prot = Protocol(omega_interact=midband, t_max=1.5e-8, dt_output=2.5e-10)
    pc = simulate_emission(qubit_spec_nobend, q1, prot).p_e
    pq = simulate_emission_quantum(qubit_spec_nobend, q1, prot).p_e
    assert np.max(np.abs(pc - pq)) < 5e-3


def test_ramped_tune_in_slows_early_decay(qubit_spec_nobend, q1, midband):
    """A finite ramp from a far-detuned park keeps early population higher."""
    quench = simulate_emission(
        qubit_spec_nobend, q1,
        Protocol(omega_interact=midband, t_max=1e-8))
    ramped = simulate_emission(
        qubit_spec_nobend, q1,
        Protocol(omega_interact=midband, t_max=1e-8, tune_time=4e-9,
                 omega_park=midband + 2 * math.pi * 1.5e9))
    i = np.searchsorted(quench.t, 4e-9)
    assert ramped.p_e[i] > quench.p_e[i]

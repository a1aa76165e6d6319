import cmath
import math

import numpy as np
import pytest

from slowline.bands import band_edges, group_velocity, tight_binding
from slowline.dressed import (SingularPointError, bound_profile,
                              diagonalize_single_excitation, qubit_weight,
                              self_energy, single_excitation_hamiltonian,
                              solve_dressed_states)
from slowline.params import EmitterParams, UnitCellParams, ValidationError

CELL = UnitCellParams(c0=353.2e-15, cg=5.05e-15, l0=3.151e-9)
J = tight_binding(CELL)["j_tb"]
W0 = CELL.omega0


def _emitter(g_over_j=0.3, omega=None):
    return EmitterParams(omega_ge=W0 if omega is None else omega,
                         g_uc=g_over_j * J)


def test_self_energy_closed_form():
    e = W0 + 0.5 * J
    g = 0.3 * J
    sigma = self_energy(e, g, CELL)
    assert sigma == pytest.approx(g**2 / (2 * math.sqrt(J * 0.5 * J)))


def test_self_energy_second_sheet_sign():
    e = W0 + 0.5 * J
    g = 0.3 * J
    assert self_energy(e, g, CELL, sheet="second") == pytest.approx(
        -self_energy(e, g, CELL))


def test_self_energy_at_edge_raises():
    with pytest.raises(SingularPointError):
        self_energy(W0, 0.3 * J, CELL)


def test_self_energy_exact_band_matches_effective_mass_near_edge():
    """Both models agree close to the edge where the band is quadratic."""
    g = 0.1 * J
    for de in (0.01, 0.003):
        e = W0 + de * J
        s_em = self_energy(e, g, CELL)
        s_ex = complex(self_energy(e, g, CELL, model="exact_band"))
        assert abs(s_ex - s_em) / abs(s_em) < 0.15


def test_self_energy_in_band_imaginary_part():
    """Im Sigma = -g^2 / v_g inside the band (retarded continuation)."""
    lo, hi = band_edges(CELL)
    e = 0.5 * (lo + hi)
    g = 0.1 * J
    kd_star = 2.0 * math.asin(math.sqrt((W0**2 / e**2 - 1) / (4 * CELL.coupling_ratio)))
    vg = abs(group_velocity(CELL, kd_star))
    sigma = complex(self_energy(e, g, CELL, model="exact_band"))
    assert sigma.imag == pytest.approx(-g**2 / vg, rel=1e-6)


def test_dressed_state_anchor_closed_forms():
    """omega_ge = omega0: E_b, E_r, and arg from the cube-root closed forms."""
    em = _emitter(0.3)
    sol = solve_dressed_states(em, CELL, j=J)
    beta = (em.g_uc**4 / (4 * J)) ** (1.0 / 3.0)
    assert sol.e_bound - W0 == pytest.approx(beta, rel=1e-6)
    assert abs(sol.e_radiative - W0) == pytest.approx(beta, rel=1e-6)
    assert cmath.phase(W0 - sol.e_radiative) == pytest.approx(math.pi / 3, rel=1e-6)
    assert sol.e_radiative.imag < 0
    assert sol.splitting == pytest.approx(2 * beta, rel=1e-9)


def test_qubit_weight_limit_two_thirds():
    em = _emitter(0.3)
    sol = solve_dressed_states(em, CELL, j=J)
    assert sol.qubit_weight == pytest.approx(2.0 / 3.0, abs=1e-3)


def test_qubit_weight_monotone_in_detuning():
    """Weight grows toward 1 as the qubit detunes into the gap."""
    prev = 0.0
    for dw in (0.0, 0.5 * J, 2 * J, 10 * J):
        sol = solve_dressed_states(_emitter(0.3, W0 + dw), CELL, j=J)
        assert sol.qubit_weight > prev
        prev = sol.qubit_weight
    assert prev > 0.9


def test_qubit_weight_errors():
    with pytest.raises(SingularPointError):
        qubit_weight(W0, W0, W0)
    with pytest.raises(ValidationError):
        qubit_weight(W0 - J, W0, W0)


def test_localization_length_scaling():
    """lambda = sqrt(J / (E_b - omega0)) shrinks with coupling."""
    sols = [solve_dressed_states(_emitter(g), CELL, j=J) for g in (0.2, 0.5, 1.0)]
    lams = [s.localization_length for s in sols]
    assert lams[0] > lams[1] > lams[2]
    s = sols[1]
    assert s.localization_length == pytest.approx(
        math.sqrt(J / (s.e_bound - W0)), rel=1e-9)


def test_lower_edge_mirror():
    lo, _ = band_edges(CELL)
    sol = solve_dressed_states(_emitter(0.3, lo), CELL, j=J, edge="lower")
    beta = (_emitter(0.3).g_uc**4 / (4 * J)) ** (1.0 / 3.0)
    assert lo - sol.e_bound == pytest.approx(beta, rel=1e-6)


def test_bound_profile_normalized():
    sol = solve_dressed_states(_emitter(0.3), CELL, j=J)
    amp = bound_profile(sol.e_bound, CELL, 201, j=J)
    assert np.sum(amp**2) == pytest.approx(1.0)
    # exponential: log-slope constant away from the center
    center = 100
    logs = np.log(amp[center + 5:center + 20])
    slopes = np.diff(logs)
    assert np.max(np.abs(slopes - slopes[0])) < 1e-9


def test_bound_profile_with_weight():
    sol = solve_dressed_states(_emitter(0.3), CELL, j=J)
    amp = bound_profile(sol.e_bound, CELL, 201, omega_ge=W0, j=J)
    assert np.sum(amp**2) == pytest.approx(1.0 - sol.qubit_weight, rel=1e-6)


def test_bound_profile_requires_gap_energy():
    with pytest.raises(ValidationError):
        bound_profile(W0 - 0.1 * J, CELL, 51, j=J)


def test_single_excitation_hamiltonian_structure():
    em = _emitter(0.3)
    h = single_excitation_hamiltonian(CELL, em, m_cells=51)
    assert h.shape == (52, 52)
    assert np.allclose(h, h.T)
    center = 25
    assert h[51, center] == pytest.approx(em.g_uc)
    assert h[51, 51] == pytest.approx(em.omega_ge)


def test_extra_couplings_offset():
    em = EmitterParams(omega_ge=W0, g_uc=0.3 * J,
                       extra_couplings={1: 0.13 * 0.3 * J})
    h = single_excitation_hamiltonian(CELL, em, m_cells=51)
    assert h[51, 26] == pytest.approx(0.13 * 0.3 * J)
    with pytest.raises(ValidationError):
        single_excitation_hamiltonian(
            CELL, EmitterParams(omega_ge=W0, g_uc=J,
                                extra_couplings={100: J}), m_cells=51)


def test_diagonalization_finds_bound_state():
    em = _emitter(0.3)
    res = diagonalize_single_excitation(CELL, em, m_cells=201)
    lo, hi = band_edges(CELL)
    e_b = res["eigenvalues"][res["bound_index"]]
    assert e_b > hi
    sol = solve_dressed_states(em, CELL, j=J)
    assert abs(e_b - hi) == pytest.approx(sol.e_bound - hi, rel=0.02)


def test_avoided_crossing_splitting():
    """Sweeping omega_ge through the edge shows a minimum gap ~ splitting."""
    em = _emitter(0.3)
    sol = solve_dressed_states(em, CELL, j=J)
    res = diagonalize_single_excitation(CELL, em, m_cells=201)
    evals = res["eigenvalues"]
    weights = res["qubit_weights"]
    # the two most qubit-like states straddle the edge by ~ Omega_WG each
    top2 = np.argsort(weights)[-2:]
    gap = abs(evals[top2[0]] - evals[top2[1]])
    assert gap == pytest.approx(sol.splitting, rel=0.35)

"""Dressed states of an emitter coupled to the resonator-array continuum.

The transcendental equation E = omega_ge + Sigma(E) has a real bound-state
root outside the passband and, on the second Riemann sheet, a complex
radiative root.  In the effective-mass (quadratic band) approximation near
the upper edge,

    Sigma(E) = g_uc^2 / (2 sqrt(J (E - omega0))),

which at omega_ge = omega0 gives the closed forms

    E_b = omega0 + (g_uc^4 / 4J)^(1/3)
    E_r = omega0 - e^{i pi/3} (g_uc^4 / 4J)^(1/3).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.optimize

from .bands import band_edges, coupling_spectrum, dispersion, group_velocity, tight_binding
from .params import EmitterParams, UnitCellParams, ValidationError

# Offset (in units of J) above the bandedge where root bracketing starts;
# keeps clear of the van Hove singularity while capturing near-edge states.
EDGE_MARGIN_J = 1e-6


class SingularPointError(ValidationError):
    """Evaluation exactly at a bandedge or other singular point."""


@dataclass(frozen=True)
class DressedStateSolution:
    e_bound: float               # rad/s, real energy outside the band
    e_radiative: complex         # rad/s, Im <= 0
    qubit_weight: float          # |c_e|^2 of the bound state
    localization_length: float   # cells
    splitting: float             # 2 * Omega_WG, rad/s


def _default_j(cell: UnitCellParams, j) -> float:
    return tight_binding(cell)["j_tb"] if j is None else float(j)


def self_energy(e, g_uc: float, cell: UnitCellParams,
                model: str = "effective_mass", j: float = None,
                edge: str = "upper", sheet: str = "first"):
    """Sigma(E) for scalar or array E (complex allowed).

    effective_mass uses the closed form above; ``sheet='second'`` selects the
    analytic continuation through the branch cut (sqrt -> -sqrt).  exact_band
    integrates g^2/(E - omega_k) over the Brillouin zone; real in-band E is
    evaluated as the principal value with the retarded -i pi * DOS term.
    """
    if model not in ("effective_mass", "exact_band"):
        raise ValidationError(f"unknown self-energy model: {model}")
    if edge not in ("upper", "lower"):
        raise ValidationError(f"edge must be 'upper' or 'lower': {edge}")
    jj = _default_j(cell, j)
    lo, hi = band_edges(cell)
    e_arr = np.atleast_1d(np.asarray(e, dtype=complex))

    if model == "effective_mass":
        w_edge = hi if edge == "upper" else lo
        sign = 1.0 if edge == "upper" else -1.0
        z = sign * (e_arr - w_edge)
        if np.any(z == 0):
            raise SingularPointError("self-energy evaluated exactly at the bandedge")
        root = np.sqrt(jj * z)
        if sheet == "second":
            root = -root
        out = sign * g_uc**2 / (2.0 * root)
        return out if np.ndim(e) else complex(out[0])

    out = np.empty(e_arr.shape, dtype=complex)
    for i, ei in enumerate(e_arr):
        out[i] = _exact_band_sigma(ei, g_uc, cell, lo, hi)
    return out if np.ndim(e) else complex(out[0])


def _exact_band_sigma(e: complex, g_uc: float, cell: UnitCellParams,
                      lo: float, hi: float) -> complex:
    if e.imag == 0:
        er = e.real
        if er in (lo, hi):
            raise SingularPointError("self-energy evaluated exactly at the bandedge")
        if lo < er < hi:
            # principal value plus retarded continuation below the axis
            kd_star = 2.0 * math.asin(math.sqrt(
                (cell.omega0**2 / er**2 - 1.0) / (4.0 * cell.coupling_ratio)))

            # quad(weight="cauchy") computes PV of f(kd)/(kd - kd*), so feed
            # it the regularized f(kd) * (kd - kd*).
            def reg(kd):
                d = er - dispersion(cell, kd)
                x = kd - kd_star
                if abs(x) < 1e-9:
                    return -1.0 / abs(group_velocity(cell, kd_star))
                return x / d

            pv, _ = scipy.integrate.quad(reg, 0.0, math.pi, weight="cauchy",
                                         wvar=kd_star, limit=200)
            vg = abs(group_velocity(cell, kd_star))
            return g_uc**2 * (pv / math.pi - 1j / vg)

        def integrand_real(kd):
            return 1.0 / (er - dispersion(cell, kd))

        val, _ = scipy.integrate.quad(integrand_real, 0.0, math.pi, limit=200)
        return g_uc**2 * val / math.pi

    def f_re(kd):
        return (1.0 / (e - dispersion(cell, kd))).real

    def f_im(kd):
        return (1.0 / (e - dispersion(cell, kd))).imag

    re, _ = scipy.integrate.quad(f_re, 0.0, math.pi, limit=200)
    im, _ = scipy.integrate.quad(f_im, 0.0, math.pi, limit=200)
    return g_uc**2 * (re + 1j * im) / math.pi


def solve_dressed_states(emitter: EmitterParams, cell: UnitCellParams,
                         model: str = "effective_mass", j: float = None,
                         edge: str = "upper") -> DressedStateSolution:
    """Bound and radiative roots of E = omega_ge + Sigma(E)."""
    jj = _default_j(cell, j)
    g = emitter.g_uc
    lo, hi = band_edges(cell)
    w_edge = hi if edge == "upper" else lo
    sign = 1.0 if edge == "upper" else -1.0
    beta = (g**4 / (4.0 * jj)) ** (1.0 / 3.0)

    def f_bound(e):
        return e - emitter.omega_ge - sign * g**2 / (
            2.0 * math.sqrt(jj * sign * (e - w_edge)))

    a = w_edge + sign * EDGE_MARGIN_J * jj
    b = w_edge + sign * (abs(emitter.omega_ge - w_edge) + 10.0 * (beta + g + jj))
    lo_e, hi_e = (a, b) if a < b else (b, a)
    if f_bound(a) * f_bound(b) > 0:
        raise ValidationError(
            f"no bound-state root in bracket [{lo_e:.6e}, {hi_e:.6e}]")
    e_b = scipy.optimize.brentq(f_bound, lo_e, hi_e, xtol=1e-6, rtol=1e-15)

    # radiative root: Newton on the second-sheet continuation
    def f_rad(e):
        return e - emitter.omega_ge + sign * g**2 / (
            2.0 * cmath.sqrt(jj * sign * (e - w_edge)))

    e_r = complex(w_edge) - sign * cmath.exp(1j * math.pi / 3.0) * beta \
        + (emitter.omega_ge - w_edge)
    for _ in range(200):
        h = 1e-6 * max(beta, 1.0)
        df = (f_rad(e_r + h) - f_rad(e_r - h)) / (2.0 * h)
        step = f_rad(e_r) / df
        e_r -= step
        if abs(step) < 1e-12 * abs(e_r):
            break
    else:
        raise ValidationError("radiative-root Newton iteration did not converge")
    if e_r.imag > 0:
        e_r = e_r.conjugate()

    weight = qubit_weight(e_b, emitter.omega_ge, w_edge) if edge == "upper" \
        else qubit_weight(2 * w_edge - e_b, 2 * w_edge - emitter.omega_ge, w_edge)
    lam = math.sqrt(jj / (sign * (e_b - w_edge)))
    return DressedStateSolution(e_bound=e_b, e_radiative=e_r,
                                qubit_weight=weight,
                                localization_length=lam,
                                splitting=2.0 * beta)


def qubit_weight(e: float, omega_ge: float, omega0: float) -> float:
    """|c_e|^2 of the bound state (upper-edge effective-mass form)."""
    if e == omega0:
        raise SingularPointError("qubit weight singular at E = omega0")
    if e < omega0:
        raise ValidationError("upper-edge form requires E > omega0")
    return 1.0 / (1.0 + 0.5 * (e - omega_ge) / (e - omega0))


def bound_profile(e: float, cell: UnitCellParams, n_cells: int,
                  omega_ge: float = None, j: float = None,
                  edge: str = "upper") -> np.ndarray:
    """Photonic amplitude per cell, |x| measured from the emitter cell.

    Amplitudes follow e^{-|x|/lambda}; when omega_ge is supplied the photonic
    part carries weight 1 - |c_e|^2 so the full state is normalized.
    """
    jj = _default_j(cell, j)
    lo, hi = band_edges(cell)
    w_edge = hi if edge == "upper" else lo
    sign = 1.0 if edge == "upper" else -1.0
    if sign * (e - w_edge) <= 0:
        raise ValidationError("bound-state energy must lie outside the band")
    lam = math.sqrt(jj / (sign * (e - w_edge)))
    x = np.arange(n_cells) - (n_cells - 1) // 2
    amp = np.exp(-np.abs(x) / lam)
    norm = math.sqrt(np.sum(amp**2))
    amp /= norm
    if omega_ge is not None:
        w = qubit_weight(e, omega_ge, w_edge) if edge == "upper" \
            else qubit_weight(2 * w_edge - e, 2 * w_edge - omega_ge, w_edge)
        amp *= math.sqrt(1.0 - w)
    return amp


def single_excitation_hamiltonian(cell: UnitCellParams, emitter: EmitterParams,
                                  m_cells: int = 201,
                                  max_range: int = 10) -> np.ndarray:
    """(M+1) x (M+1) Hamiltonian: photonic block with hopping from the
    coupling spectrum, the emitter level last, coupled at the central cell."""
    cs = coupling_spectrum(cell, m_cells if m_cells % 2 else m_cells + 1,
                           max_range)
    h = np.zeros((m_cells + 1, m_cells + 1))
    idx = np.arange(m_cells)
    for n_dist, v in zip(cs.distance, cs.v):
        if n_dist == 0:
            h[idx, idx] = v
        else:
            rows = idx[:-n_dist]
            h[rows, rows + n_dist] = v
            h[rows + n_dist, rows] = v
    center = (m_cells - 1) // 2
    h[m_cells, m_cells] = emitter.omega_ge
    h[m_cells, center] = h[center, m_cells] = emitter.g_uc
    for offset, g in emitter.extra_couplings.items():
        site = center + offset
        if not 0 <= site < m_cells:
            raise ValidationError(f"extra coupling offset {offset} outside array")
        h[m_cells, site] = h[site, m_cells] = g
    return h


def diagonalize_single_excitation(cell: UnitCellParams, emitter: EmitterParams,
                                  m_cells: int = 201,
                                  max_range: int = 10) -> dict:
    """Eigenpairs of the finite single-excitation problem.

    Returns eigenvalues (ascending), eigenvectors (columns; last row is the
    emitter amplitude), and the index of the bound state: the eigenstate of
    maximal emitter weight among those outside the band.
    """
    h = single_excitation_hamiltonian(cell, emitter, m_cells, max_range)
    evals, evecs = np.linalg.eigh(h)
    lo, hi = band_edges(cell)
    weights = np.abs(evecs[-1, :]) ** 2
    outside = (evals < lo) | (evals > hi)
    if np.any(outside):
        candidates = np.where(outside)[0]
        bound_index = int(candidates[np.argmax(weights[candidates])])
    else:
        bound_index = int(np.argmax(weights))
    return {"eigenvalues": evals, "eigenvectors": evecs,
            "bound_index": bound_index, "qubit_weights": weights}

"""Two-port ABCD analysis of finite resonator arrays.

The chain is cascaded element by element: series coupling capacitors
alternating with shunt LC branches (internal loss folded in as a parallel
conductance per resonator).  S-parameters are referenced to the real port
impedance of the spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ArraySpec, UnitCellParams, ValidationError


@dataclass(frozen=True)
class TwoPortResponse:
    """Transmission/reflection amplitudes on a strictly increasing grid of
    angular frequencies."""

    freq_grid: np.ndarray    # rad/s
    s21: np.ndarray          # complex
    s11: np.ndarray          # complex

    def __post_init__(self):
        if np.any(np.diff(self.freq_grid) <= 0):
            raise ValidationError("frequency grid must be strictly increasing")

    @property
    def s21_db(self) -> np.ndarray:
        return 20.0 * np.log10(np.abs(self.s21))

    def group_delay(self) -> np.ndarray:
        """Group delay -d arg(s21)/d omega, seconds."""
        phase = np.unwrap(np.angle(self.s21))
        return -np.gradient(phase, self.freq_grid)

    def to_csv(self, path) -> None:
        header = "omega_rad_s,s21_re,s21_im,s11_re,s11_im"
        data = np.column_stack([self.freq_grid, self.s21.real, self.s21.imag,
                                self.s11.real, self.s11.imag])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.12e")

    @classmethod
    def from_csv(cls, path) -> "TwoPortResponse":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(freq_grid=data[:, 0],
                   s21=data[:, 1] + 1j * data[:, 2],
                   s11=data[:, 3] + 1j * data[:, 4])


def default_grid(cell: UnitCellParams, n_points: int = 2001) -> np.ndarray:
    """Default frequency grid spanning both bandedges with margin."""
    w0 = cell.omega0
    return np.linspace(0.93 * w0, 1.02 * w0, n_points)


def _mat_mul(abcd, other):
    a, b, c, d = abcd
    a2, b2, c2, d2 = other
    return (a * a2 + b * c2, a * b2 + b * d2,
            c * a2 + d * c2, c * b2 + d * d2)


def _series_cap(w, cap):
    z = 1.0 / (1j * w * cap)
    one = np.ones_like(z)
    return (one, z, np.zeros_like(z), one)


def _shunt_branch(w, c_shunt, l, g_loss):
    y = 1j * w * c_shunt + 1.0 / (1j * w * l) + g_loss
    one = np.ones_like(y)
    return (one, np.zeros_like(y), y, one)


def _loss_conductance(c_shunt: float, l: float, q: float) -> float:
    # parallel resistance R = q/(omega_res * c_shunt), valid near resonance
    if math.isinf(q):
        return 0.0
    return math.sqrt(c_shunt / l) / q


def chain_abcd(spec: ArraySpec, freq_grid: np.ndarray):
    """Total ABCD matrix of the chain (port to port), per grid point."""
    w = np.asarray(freq_grid, dtype=float)
    if np.any(w <= 0):
        raise ValidationError("frequency grid must avoid DC and be positive")
    q = spec.interior.q_internal
    shunts = spec.shunt_elements()
    couplers = spec.coupler_elements()
    one = np.ones_like(w, dtype=complex)
    total = (one, np.zeros_like(one), np.zeros_like(one), one)
    for i, (c_sh, l) in enumerate(shunts):
        total = _mat_mul(total, _series_cap(w, couplers[i]))
        total = _mat_mul(total, _shunt_branch(w, c_sh, l, _loss_conductance(c_sh, l, q)))
    total = _mat_mul(total, _series_cap(w, couplers[-1]))
    return total


def cascade_abcd(spec: ArraySpec, freq_grid: np.ndarray) -> TwoPortResponse:
    """S21/S11 of the finite array between its resistive ports.

    Grid points where the conversion is singular yield NaN rather than
    raising.
    """
    a, b, c, d = chain_abcd(spec, freq_grid)
    z0 = spec.port_impedance
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = a + b / z0 + c * z0 + d
        s21 = 2.0 / denom
        s11 = (a + b / z0 - c * z0 - d) / denom
    return TwoPortResponse(freq_grid=np.asarray(freq_grid, dtype=float),
                           s21=s21, s11=s11)


def unit_cell_abcd(cell: UnitCellParams, freq_grid: np.ndarray):
    """ABCD of one periodic cell (series coupler followed by shunt branch)."""
    w = np.asarray(freq_grid, dtype=float)
    g = _loss_conductance(cell.c0, cell.l0, cell.q_internal)
    return _mat_mul(_series_cap(w, cell.cg), _shunt_branch(w, cell.c0, cell.l0, g))


def bloch_analysis(cell: UnitCellParams, freq_grid: np.ndarray) -> dict:
    """Complex propagation constant k(w)*d and Bloch impedance of the periodic
    cell.

    Branch convention: inside the passband k*d is real in [0, pi] with k*d -> 0
    at the upper bandedge (group and phase velocities are opposite, so omega
    decreases with k); outside the band Im(k*d) >= 0 so that e^{ik x} decays.
    The Bloch impedance is the root with non-negative real part in the
    passband.
    """
    a, b, c, d = unit_cell_abcd(cell, freq_grid)
    cos_kd = ((a + d) / 2.0).astype(complex)
    kd = np.arccos(cos_kd)
    kd = np.where(kd.imag < 0, -kd, kd)
    # Bloch eigenvalue relation: A V + B I = mu V, mu = exp(-i k d).  The two
    # eigen-impedances correspond to the two propagation directions; keep the
    # one carrying power forward (Re z >= 0) in the passband, the decaying one
    # outside.
    with np.errstate(divide="ignore", invalid="ignore"):
        z_fwd = b / (np.exp(-1j * kd) - a)
        z_bwd = b / (np.exp(+1j * kd) - a)
    in_band = np.abs(kd.imag) < 1e-9
    use_bwd = in_band & (z_fwd.real < 0) & (z_bwd.real >= 0)
    z_bloch = np.where(use_bwd, z_bwd, z_fwd)
    return {"kd": kd, "z_bloch": z_bloch}

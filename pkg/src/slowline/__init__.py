"""slowline: resonator-array slow-light waveguides and emitter dynamics."""

from .params import (ArraySpec, Bend, BoundaryCellParams, EmitterParams,
                     QubitCircuitParams, UnitCellParams, ValidationError)

__version__ = "0.1.0"

from .abcd import TwoPortResponse, bloch_analysis, cascade_abcd, default_grid
from .bands import (CouplingSpectrum, DispersionCurve, band_edges, bandwidth,
                    coupling_spectrum, delay_metrics, dispersion,
                    dispersion_curve, group_velocity, tight_binding)
from .statespace import StateSpaceModel, assemble_state_space
from .fitting import FitReport, fit_to_spectrum
from .dressed import (DressedStateSolution, SingularPointError, bound_profile,
                      diagonalize_single_excitation, qubit_weight, self_energy,
                      solve_dressed_states)
from .dynamics import (DynamicsTrace, Modulation, Protocol, bandedge_oracle,
                       effective_rate, ideal_mirror_oracle, lifetime_1e,
                       revival_onsets, simulate_emission,
                       simulate_emission_quantum, simulate_mirror)
from .taper import TaperProblem, TaperReport, optimize, ripple
from .disorder import (DisorderEnsembleResult, FsrReport, SigmaCalibration,
                       calibrate_sigma, extinction_curve, fsr_variance,
                       sample_disordered)

__all__ = [
    "ArraySpec", "Bend", "BoundaryCellParams", "EmitterParams",
    "QubitCircuitParams", "UnitCellParams", "ValidationError",
    "TwoPortResponse", "bloch_analysis", "cascade_abcd", "default_grid",
    "CouplingSpectrum", "DispersionCurve", "band_edges", "bandwidth",
    "coupling_spectrum", "delay_metrics", "dispersion", "dispersion_curve",
    "group_velocity", "tight_binding",
    "StateSpaceModel", "assemble_state_space",
    "FitReport", "fit_to_spectrum",
    "DressedStateSolution", "SingularPointError", "bound_profile",
    "diagonalize_single_excitation", "qubit_weight", "self_energy",
    "solve_dressed_states",
    "DynamicsTrace", "Modulation", "Protocol", "bandedge_oracle",
    "effective_rate", "ideal_mirror_oracle", "lifetime_1e", "revival_onsets",
    "simulate_emission", "simulate_emission_quantum", "simulate_mirror",
    "TaperProblem", "TaperReport", "optimize", "ripple",
    "DisorderEnsembleResult", "FsrReport", "SigmaCalibration",
    "calibrate_sigma", "extinction_curve", "fsr_variance", "sample_disordered",
    "__version__",
]

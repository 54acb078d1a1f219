"""Convergence-radius estimation for periodically driven one-body systems.

The package builds truncated-oscillator and kicked-rotor models, evolves
them over one driving period, expands the effective Hamiltonian as a
power series in the period with cross-precision trust certification, and
turns successive-term ratios into radius and decay-ceiling estimates.
Spectral diagnostics (quasi-energy gap statistics, state entropies,
long-time energies) and a closed-form oracle suite round out the
toolkit; the ``floqmag`` command line exposes the standard scans.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .convergence import (DEFAULT_SCHEDULE, ELEMENT, FROBENIUS, DecayFit,
                          Plateau, RadiusEstimate, RatioCurve,
                          bandwidth_heuristic, decay_fit, detect_plateau,
                          element_limit, element_ratio_curve,
                          estimate_radius, kappa_fit, ratio_curve)
from .errors import (AnalysisError, BranchWrapWarning, DegeneracyWarning,
                     FloqmagError, ParameterError, TrustOrderWarning,
                     UnconvergedLimitWarning, ValidationError,
                     ZeroSpacingWarning)
from .evolution import (FloquetOperator, floquet_operator,
                        hermitian_phase_exp, kicked_rotor_operator,
                        stroboscopic_energies)
from .magnus import (DOUBLE, EXTENDED, PRECISIONS, BchFactors, MagnusSeries,
                     bch_factors, certify_precision, klarsfeld_terms,
                     magnus_series, parity_signs)
from .operators import (ModelSpec, TruncatedSystem, build_ladder_power,
                        build_system, momentum_matrix)
from .oracles import (AnalyticHF, MonodromyResult, analytic_hf_driven_ho,
                      bch_reference, hf_from_log, parametric_monodromy)
from .spectral import (FloquetSpectrum, LevelStatistics, diagonalize,
                       finite_time_energy, level_spacing_stats,
                       long_time_energy, reference_distributions,
                       shannon_entropy)

__all__ = [
    "__version__",
    # errors and warnings
    "FloqmagError", "ParameterError", "ValidationError", "AnalysisError",
    "TrustOrderWarning", "DegeneracyWarning", "ZeroSpacingWarning",
    "BranchWrapWarning", "UnconvergedLimitWarning",
    # model construction
    "ModelSpec", "TruncatedSystem", "build_system", "build_ladder_power",
    "momentum_matrix",
    # evolution
    "FloquetOperator", "floquet_operator", "hermitian_phase_exp",
    "kicked_rotor_operator", "stroboscopic_energies",
    # spectral diagnostics
    "FloquetSpectrum", "LevelStatistics", "diagonalize", "shannon_entropy",
    "long_time_energy", "finite_time_energy", "level_spacing_stats",
    "reference_distributions",
    # series expansion
    "DOUBLE", "EXTENDED", "PRECISIONS", "BchFactors", "MagnusSeries",
    "bch_factors", "klarsfeld_terms", "magnus_series", "certify_precision",
    "parity_signs",
    # convergence analysis
    "ELEMENT", "FROBENIUS", "DEFAULT_SCHEDULE", "RatioCurve", "Plateau",
    "RadiusEstimate", "DecayFit", "ratio_curve", "element_limit",
    "element_ratio_curve", "detect_plateau", "estimate_radius", "decay_fit",
    "kappa_fit", "bandwidth_heuristic",
    # oracles
    "AnalyticHF", "MonodromyResult", "analytic_hf_driven_ho", "hf_from_log",
    "bch_reference", "parametric_monodromy",
]

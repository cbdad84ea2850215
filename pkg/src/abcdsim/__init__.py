"""Spectral simulation and decay diagnostics for a coupled dispersive
wave system over a moving bottom."""

from .bathymetry import (
    Bathymetry,
    BathymetrySamples,
    HypothesisReport,
    decaying_bump,
    flat_bottom,
    hypothesis_report,
    smooth_switch_bump,
    static_bump,
    traveling_ripple,
)
from .classifier import (
    QuadCoeffs,
    RegionVerdict,
    find_admissible_alpha,
    quadratic_coeffs,
    refined_margin,
    satisfies_refined_dispersion,
)
from .diagnostics import (
    DecaySeries,
    DiagnosticsEngine,
    DiagnosticsRecord,
    decay_metrics,
    hamiltonian_h,
    local_energy,
    momentum,
    virial_I,
    virial_J,
    virial_rate_decomposition,
)
from .grid import Grid, canonical_pair
from .initial import gaussian_pair, random_bandlimited_pair, single_mode_pair, zero_pair
from .params import AbcdParams, ValidationReport, params_from_physical, validate_generic_hamiltonian
from .solver import (
    BlowUp,
    CflViolation,
    NonFinite,
    RunResult,
    SimConfig,
    SimulationAbort,
    State,
    max_group_speed,
    rhs,
    run,
    state_h1_norm,
    step_rk4,
)
from .weights import T_MIN, WeightSet, scheduled_weights, weight_set, window_scale, window_scale_rate

__all__ = [
    "AbcdParams",
    "Bathymetry",
    "BathymetrySamples",
    "BlowUp",
    "CflViolation",
    "DecaySeries",
    "DiagnosticsEngine",
    "DiagnosticsRecord",
    "Grid",
    "HypothesisReport",
    "NonFinite",
    "QuadCoeffs",
    "RegionVerdict",
    "RunResult",
    "SimConfig",
    "SimulationAbort",
    "State",
    "T_MIN",
    "ValidationReport",
    "WeightSet",
    "canonical_pair",
    "decay_metrics",
    "decaying_bump",
    "find_admissible_alpha",
    "flat_bottom",
    "gaussian_pair",
    "hamiltonian_h",
    "hypothesis_report",
    "local_energy",
    "max_group_speed",
    "momentum",
    "params_from_physical",
    "quadratic_coeffs",
    "random_bandlimited_pair",
    "refined_margin",
    "rhs",
    "run",
    "satisfies_refined_dispersion",
    "scheduled_weights",
    "single_mode_pair",
    "smooth_switch_bump",
    "state_h1_norm",
    "static_bump",
    "step_rk4",
    "traveling_ripple",
    "validate_generic_hamiltonian",
    "virial_I",
    "virial_J",
    "virial_rate_decomposition",
    "weight_set",
    "window_scale",
    "window_scale_rate",
    "zero_pair",
]

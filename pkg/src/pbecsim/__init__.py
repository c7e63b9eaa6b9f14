"""Multimode photon condensate simulator: steady-state correlations and
temporal coherence of a dye-filled microcavity across a pump sweep."""

__version__ = "0.1.0"

from .modes import ModeBasis, build_basis, mode_value
from .dye import RateSet, SpatialProfiles, build_profiles, ks_rates, load_rate_table
from .overlap import OverlapMatrices, compute_f, compute_h
from .dynamics import (
    ConvergenceError,
    ModelParams,
    SimulationError,
    SteadyState,
    calibrate_peak_rate,
    clamp_diagnostics,
    eq6_residual,
    integrate,
    rhs,
    solve_ramp,
    solve_steady,
    threshold_scan,
)
from .coherence import analyze, coherence, generator, propagate, tau_closed_form, tau_from_trace
from .config import SweepConfig, parse_config
from .sweep import figure_data, run_sweep

__all__ = [
    "ModeBasis", "build_basis", "mode_value",
    "RateSet", "SpatialProfiles", "build_profiles", "ks_rates", "load_rate_table",
    "OverlapMatrices", "compute_f", "compute_h",
    "ConvergenceError", "ModelParams", "SimulationError", "SteadyState",
    "calibrate_peak_rate", "clamp_diagnostics", "eq6_residual", "integrate", "rhs",
    "solve_ramp", "solve_steady", "threshold_scan",
    "analyze", "coherence", "generator", "propagate", "tau_closed_form", "tau_from_trace",
    "SweepConfig", "parse_config", "figure_data", "run_sweep",
]

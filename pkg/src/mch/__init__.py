"""Periodic pseudospectral toolkit for the modified multi-component Camassa-Holm system."""

from .besov import BesovParams, LPDecomposition, besov_norm, lp_decompose
from .diagnostics import DiagnosticsRecord, SteepeningAlert, detect_steepening, record, run_monitored
from .dynamics import MomentumState, State, compute_F1, compute_F2, energy, nonlocal_rhs
from .initial_data import InitialDataSpec, initial_state
from .solvers import SolverConfig, integrate, picard_solve, step_rk4
from .spectral import Grid

__version__ = "0.1.0"

__all__ = [
    "BesovParams",
    "DiagnosticsRecord",
    "Grid",
    "InitialDataSpec",
    "LPDecomposition",
    "MomentumState",
    "SolverConfig",
    "State",
    "SteepeningAlert",
    "besov_norm",
    "compute_F1",
    "compute_F2",
    "detect_steepening",
    "energy",
    "initial_state",
    "integrate",
    "lp_decompose",
    "nonlocal_rhs",
    "picard_solve",
    "record",
    "run_monitored",
    "step_rk4",
]

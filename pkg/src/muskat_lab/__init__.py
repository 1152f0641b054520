"""Numerical laboratory for the periodic two-phase Muskat problem."""

__version__ = "0.1.0"

from .spectral import PeriodicField, Spectrum, grid
from .singular_ops import Interface, OperatorMatrix, QuadratureRule, assemble, solve_omega
from .physics import PhysicalParams, DerivedConstants, derive_constants
from .evolution import SimulationState, StepControl, SimSeries, Status, simulate
from .equilibria import Branch, BranchPoint, continue_branch, lambda_star

__all__ = [
    "PeriodicField", "Spectrum", "grid", "Interface", "OperatorMatrix", "QuadratureRule",
    "assemble", "solve_omega", "PhysicalParams", "DerivedConstants", "derive_constants",
    "SimulationState", "StepControl", "SimSeries", "Status", "simulate", "Branch",
    "BranchPoint", "continue_branch", "lambda_star",
]

"""Solvers for the deterministic programs produced by Galerkin transcription."""
from .admm import soc_project, solve
from .eqqp import solve_eq_qp
from .kernels import BACKEND
from .program import ConicProgram, SocConstraint, Solution, SolverSettings, Status

__all__ = [
    "BACKEND",
    "ConicProgram",
    "SocConstraint",
    "Solution",
    "SolverSettings",
    "Status",
    "soc_project",
    "solve",
    "solve_eq_qp",
]

"""Adaptive learning tube MPC for linear systems with an unknown constant offset."""
from .controller import ModelData, MpcConfig, MpcSolution, initial_trajectory, solve_mpc
from .lp import BACKEND, LinearProgram, LpResult, LpStatus, solve_lp
from .polytope import HPolytope
from .regulator import Gains, lqr_gain, solve_dare
from .simulator import (ExperimentConfig, ExperimentResult, IterationLog, compare_runs,
                        run_experiment)
from .uncertainty import FeasibleParameterSet, fps_update, mrpi_outer_2d, tightening_vector

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ExperimentConfig", "ExperimentResult", "FeasibleParameterSet", "Gains",
    "HPolytope", "IterationLog", "LinearProgram", "LpResult", "LpStatus", "ModelData",
    "MpcConfig", "MpcSolution", "compare_runs", "fps_update", "initial_trajectory",
    "lqr_gain", "mrpi_outer_2d", "run_experiment", "solve_dare", "solve_lp", "solve_mpc",
    "tightening_vector",
]

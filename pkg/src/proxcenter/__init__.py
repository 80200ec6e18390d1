"""Decomposition solvers for separable convex programs with linear coupling.

The main entry points are :func:`run_pcm` (proximal center method on the
smoothed dual) and :func:`run_dsm` (dual subgradient baseline).
"""

from .dsm import StepRule, run_dsm
from .dual import (
    DualEvaluation,
    SmoothingConfig,
    ball_gap_bound,
    evaluate,
    operator_norm,
    plain_dual,
    problem_constants,
    select_c_ball,
    select_c_euclidean,
)
from .errors import ConvergenceError, DimensionError, InfeasiblePointError, NotConvexError, ProxCenterError
from .instances import KktConstructed, MpcRecast, NetworkAlloc, RandomBallQP, generate
from .pcm import PcmState, certify, dual_averaging_step, gradient_step, run_pcm
from .problem import (
    AgentBlock,
    Ball,
    SeparableProblem,
    Simplex,
    coupling_residual,
    load_problem,
    membership,
    save_problem,
    total_objective,
    violation,
)
from .prox import Entropy, MultiplierSpace, SquaredEuclidean, project_multiplier, prox_value
from .reference import reference_solve
from .runs import Certificate, SolverRun, read_trace, write_trace
from .subsolver import SubproblemSolution, solve_ball_quadratic, solve_generic, solve_simplex_linear

__version__ = "0.1.0"

"""Recovery of cosparse vectors by l_q-analysis minimization, 0 < q <= 1.

The pieces are analysis operators (:mod:`.operators`), synthetic and phantom
problem generators (:mod:`.instances`), the reweighted least-squares solver
(:mod:`.solver`), closed-form recovery conditions (:mod:`.theory`),
brute-force certificates for tiny problems (:mod:`.certify`) and the
experiment harness (:mod:`.experiments`).
"""

from .certify import Verdict, dnspq_check, drip_delta, omega_rip_delta, verify_witness
from .errors import LqAnalysisError
from .experiments import (
    LambdaPolicy,
    PhaseGrid,
    PhaseResult,
    SweepAxis,
    emit_plot,
    run_phantom,
    run_phase_transition,
    run_recovery_demo,
)
from .instances import ProblemInstance, make_instance, make_phantom_task
from .operators import (
    AnalysisOperator,
    cosparsity,
    make_fd_1d,
    make_fd_2d,
    make_identity,
    make_random_parseval_frame,
)
from .solver import RecoveryResult, SolverConfig, Termination, coirlq, solve
from .theory import Mode, delta_threshold, rho_of, theory_report, threshold_table

__version__ = "0.1.0"

__all__ = [
    "AnalysisOperator",
    "LambdaPolicy",
    "LqAnalysisError",
    "Mode",
    "PhaseGrid",
    "PhaseResult",
    "ProblemInstance",
    "RecoveryResult",
    "SolverConfig",
    "SweepAxis",
    "Termination",
    "Verdict",
    "coirlq",
    "cosparsity",
    "delta_threshold",
    "dnspq_check",
    "drip_delta",
    "emit_plot",
    "make_fd_1d",
    "make_fd_2d",
    "make_identity",
    "make_instance",
    "make_phantom_task",
    "make_random_parseval_frame",
    "omega_rip_delta",
    "rho_of",
    "run_phantom",
    "run_phase_transition",
    "run_recovery_demo",
    "solve",
    "theory_report",
    "threshold_table",
    "verify_witness",
]

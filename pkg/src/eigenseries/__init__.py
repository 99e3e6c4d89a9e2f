"""Exact series solutions for finite Hermitian eigenproblems.

Split a Hamiltonian into diagonal levels plus strictly off-diagonal
coupling, solve each level's scalar kernel equation for exact eigenvalues,
assemble eigenvectors from the Q amplitudes, expand the propagator in
coupling order with confluent divided differences, and cross-check
everything against a built-in dense diagonalization oracle.
"""

from .backend import available_backends, backend_name
from .errors import (
    AccuracyWarning,
    DegenerateInput,
    EigenSeriesError,
    IllConditionedWarning,
    InvalidSpec,
    NoConvergence,
    NoRealRoot,
    NotConverged,
    NotHermitian,
    PoleHit,
    SingularSolve,
)
from .evolution import (
    EvolutionSeries,
    PropagationResult,
    confluent_divided_difference,
    evolution_coefficient,
    evolution_series,
    propagate,
)
from .hamiltonian import (
    HermitianMatrix,
    ModelSpec,
    SplitHamiltonian,
    check_nondegenerate,
    generate_model,
    load_matrix_json,
    split,
)
from .jets import Jet
from .kernel import (
    KernelConfig,
    KernelSeriesResult,
    kernel_jet,
    kernel_resolvent,
    kernel_series,
    spectral_radius_estimate,
)
from .oracle import EigenDecomposition, dense_eig, expm_minus_iHt
from .solver import (
    Eigenpair,
    Eq19Result,
    SolveConfig,
    SpectrumResult,
    build_q,
    eigenvalue_operator_residual,
    eigenvalue_series_eq19,
    green_operator,
    rs_perturbation,
    solve_level,
    solve_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "DegenerateInput",
    "EigenDecomposition",
    "EigenSeriesError",
    "Eigenpair",
    "Eq19Result",
    "EvolutionSeries",
    "HermitianMatrix",
    "IllConditionedWarning",
    "InvalidSpec",
    "Jet",
    "KernelConfig",
    "KernelSeriesResult",
    "ModelSpec",
    "NoConvergence",
    "NoRealRoot",
    "NotConverged",
    "NotHermitian",
    "PoleHit",
    "PropagationResult",
    "SingularSolve",
    "SolveConfig",
    "SpectrumResult",
    "SplitHamiltonian",
    "available_backends",
    "backend_name",
    "build_q",
    "check_nondegenerate",
    "confluent_divided_difference",
    "dense_eig",
    "eigenvalue_operator_residual",
    "eigenvalue_series_eq19",
    "evolution_coefficient",
    "evolution_series",
    "expm_minus_iHt",
    "generate_model",
    "green_operator",
    "kernel_jet",
    "kernel_resolvent",
    "kernel_series",
    "load_matrix_json",
    "propagate",
    "rs_perturbation",
    "solve_level",
    "solve_spectrum",
    "spectral_radius_estimate",
    "split",
]

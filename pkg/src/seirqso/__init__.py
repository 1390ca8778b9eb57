"""Discrete-time SEIR epidemic map viewed as a quadratic stochastic operator."""

from .core import (
    SIMPLEX_TOL,
    Admissibility,
    DomainError,
    DriftError,
    MalformedInputError,
    ModelError,
    Params,
    ParameterError,
    SimplexState,
    fixed_point,
    step,
    validate_params,
)
from .qso import QsoTensor, apply, build_tensor, verify_tensor
from .spectral import SpectralReport, classify, critical_alpha, eigenvalues_at, jacobian_at
from .trajectory import (
    LimitReport,
    Trajectory,
    entry_time_into_M,
    find_limit,
    in_M,
    peak,
    reconstruct_from_v,
    recurrence_residual,
    simulate,
)

__all__ = [
    "SIMPLEX_TOL",
    "Admissibility",
    "DomainError",
    "DriftError",
    "LimitReport",
    "MalformedInputError",
    "ModelError",
    "ParameterError",
    "Params",
    "QsoTensor",
    "SimplexState",
    "SpectralReport",
    "Trajectory",
    "apply",
    "build_tensor",
    "classify",
    "critical_alpha",
    "eigenvalues_at",
    "entry_time_into_M",
    "find_limit",
    "fixed_point",
    "in_M",
    "jacobian_at",
    "peak",
    "reconstruct_from_v",
    "recurrence_residual",
    "simulate",
    "step",
    "validate_params",
    "verify_tensor",
]

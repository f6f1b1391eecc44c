"""Interval singular triplets of real matrices by complex-moment contour integration."""

from .contour import EXP, IDENTITY, ContourRule, Transform, TransformKind, build_contour, half_rule
from .errors import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    DegenerateSubspaceError,
    DomainError,
    MatrixMarketError,
    NumericalError,
    SingularShiftError,
    SsSvdError,
)
from .extract import TripletSet
from .filters import convergence_ratio, eval_filter, filter_profile
from .moments import SsParams
from .oracle import OracleSVD, error_bound_report, jacobi_svd
from .pipeline import MODES, SolveResult, accuracy, solve
from .problems import Model, ModelSpec, build_model, normalize_spectrum, read_matrix_market, write_matrix_market

__all__ = [
    "EXP",
    "IDENTITY",
    "MODES",
    "CalibrationError",
    "ConfigError",
    "ContourRule",
    "ConvergenceError",
    "DegenerateSubspaceError",
    "DomainError",
    "MatrixMarketError",
    "Model",
    "ModelSpec",
    "NumericalError",
    "OracleSVD",
    "SingularShiftError",
    "SolveResult",
    "SsParams",
    "SsSvdError",
    "Transform",
    "TransformKind",
    "TripletSet",
    "accuracy",
    "build_contour",
    "build_model",
    "convergence_ratio",
    "error_bound_report",
    "eval_filter",
    "filter_profile",
    "half_rule",
    "jacobi_svd",
    "normalize_spectrum",
    "read_matrix_market",
    "solve",
    "write_matrix_market",
]

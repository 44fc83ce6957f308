"""Turán determinants of symmetric orthogonal polynomials and numerical checks of their bounds."""
from .schemes import (
    OrthonormalScheme,
    RecurrenceScheme,
    SchemeError,
    build_orthonormal,
    build_scheme,
    jacobi_scheme,
    q_ultra_orthonormal,
    q_ultra_scheme,
)
from .turan import normalized_turan, turan_delta

__version__ = "0.1.0"

__all__ = [
    "OrthonormalScheme",
    "RecurrenceScheme",
    "SchemeError",
    "build_orthonormal",
    "build_scheme",
    "jacobi_scheme",
    "normalized_turan",
    "q_ultra_orthonormal",
    "q_ultra_scheme",
    "turan_delta",
]

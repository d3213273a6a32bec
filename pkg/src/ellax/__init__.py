"""Elliptic Selberg integrals, biorthogonal functions and their Lax pair, checked numerically."""

__version__ = "0.1.0"

from .biorth import ArgumentPoint, BiorthContext, hat, plain
from .errors import (AccuracyError, BalancingError, ContourError, DomainError, EllaxError, PoleError,
                     SingularContextError)
from .lax import BContext, LaxContext
from .params import ParameterSet, check_contour, solve_last
from .quadrature import QuadratureControls

__all__ = [
    "__version__", "ArgumentPoint", "BiorthContext", "hat", "plain", "AccuracyError", "BalancingError",
    "ContourError", "DomainError", "EllaxError", "PoleError", "SingularContextError", "BContext",
    "LaxContext", "ParameterSet", "check_contour", "solve_last", "QuadratureControls",
]

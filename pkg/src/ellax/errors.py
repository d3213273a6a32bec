"""Exception hierarchy shared by every layer of ellax."""

from __future__ import annotations


class EllaxError(Exception):
    """Base class for all library errors."""


class DomainError(EllaxError, ValueError):
    """An argument lies outside the domain of the requested function."""


class PoleError(DomainError):
    """Argument sits (numerically) on a pole of an elliptic gamma factor."""

    def __init__(self, z: complex, i: int, j: int):
        self.z = z
        self.i = i
        self.j = j
        super().__init__(f"pole of elliptic gamma at z={z!r}: z*p^{i}*q^{j} = 1")


class ContourError(DomainError):
    """The unit circle is not an admissible contour for these parameters."""


class BalancingError(DomainError):
    """Parameters violate the balancing condition."""


class AccuracyError(EllaxError, ArithmeticError):
    """Quadrature failed to converge before reaching its node cap."""

    def __init__(self, message: str, last: complex | None = None, previous: complex | None = None):
        self.last = last
        self.previous = previous
        super().__init__(message)


class SingularContextError(EllaxError, ArithmeticError):
    """A normalising quantity (e.g. F+_n(v, w)) vanishes, so the matrix is singular."""

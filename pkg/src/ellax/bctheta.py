"""BC_1-symmetric theta functions represented as products of theta_p(a z^{+-1})."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EllaxError
from .kernel import nome, theta_pm


class DegeneracyError(EllaxError):
    """A random basis could not be made well conditioned."""


@dataclass(frozen=True)
class BC1Theta:
    """scalar * prod_k theta_p(a_k z) theta_p(a_k / z); degree = len(factors)."""

    p: complex
    factors: tuple = field(default_factory=tuple)
    scalar: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", nome(self.p))
        object.__setattr__(self, "factors", tuple(complex(a) for a in self.factors))
        object.__setattr__(self, "scalar", complex(self.scalar))
        if any(a == 0 for a in self.factors):
            raise DomainError("theta factor parameters must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.factors)

    def __call__(self, z):
        return eval_bc1(self, z)


def eval_bc1(f: BC1Theta, z):
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, f.scalar, dtype=complex)
    for a in f.factors:
        out = out * theta_pm(f.p, a, z)
    return complex(out) if out.ndim == 0 else out


def random_bc1(p, n: int, rng: np.random.Generator) -> BC1Theta:
    """Degree-n product with |a_k| in [0.3, 0.9] and uniform phases."""
    mod = rng.uniform(0.3, 0.9, size=n)
    phase = rng.uniform(0.0, 2 * np.pi, size=n)
    return BC1Theta(p, tuple(mod * np.exp(1j * phase)))


def _test_points(n: int, rng: np.random.Generator) -> np.ndarray:
    mod = rng.uniform(0.6, 0.95, size=n + 1)
    phase = rng.uniform(0.0, 2 * np.pi, size=n + 1)
    return mod * np.exp(1j * phase)


def basis(p, n: int, seed: int = 0, retries: int = 32) -> list[BC1Theta]:
    """n+1 degree-n BC_1 theta functions that are numerically independent.

    Independence is judged by the condition number of the evaluation matrix at
    n+1 random test points (< 1e8).
    """
    if n < 0:
        raise DomainError("degree must be non-negative")
    p = nome(p)
    if n == 0:
        return [BC1Theta(p, ())]
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        funcs = [random_bc1(p, n, rng) for _ in range(n + 1)]
        pts = _test_points(n, rng)
        mat = np.array([[f(z) for f in funcs] for z in pts])
        if np.linalg.cond(mat) < 1e8:
            return funcs
    raise DegeneracyError(f"no well-conditioned degree-{n} basis after {retries} tries")


def interpolate(funcs: list[BC1Theta], nodes, values):
    """Coefficients c with sum_k c_k funcs[k](nodes[i]) = values[i]."""
    mat = np.array([[f(z) for f in funcs] for z in nodes])
    return np.linalg.solve(mat, np.asarray(values, dtype=complex))

"""Trapezoid quadrature on the unit circle and its tensor powers.

For f analytic on an annulus around |z| = 1 the N-point trapezoid rule for
``oint f(z) dz / (2 pi i z)`` converges geometrically, so refinement simply
doubles N until two successive estimates agree.

Two entry points:

* :func:`integrate_circle` takes an arbitrary vectorised integrand of d
  variables and sums it over the full tensor grid.
* :func:`integrate_bc` handles the factorised integrands that dominate the
  elliptic Selberg family, ``prod_i h(z_i) prod_{i<j} C(z_i, z_j)`` with the
  per-variable weight and pair kernel tabulated once per grid.  This turns
  the d = 2 case into a quadratic form and d = 3 into a single contraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import AccuracyError, DomainError

MAX_DIM = 3
DEFAULT_N = {0: 1, 1: 512, 2: 256, 3: 128}
DEFAULT_MAX_N = {0: 1, 1: 4096, 2: 1024, 3: 256}
DEFAULT_REFINE = 1e-12
MIN_N = 16


@dataclass(frozen=True)
class CircleGrid:
    N: int
    d: int = 1

    def __post_init__(self):
        if self.d < 0 or self.d > MAX_DIM:
            raise DomainError(f"dimension {self.d} unsupported (0..{MAX_DIM})")
        if self.N < MIN_N or self.N & (self.N - 1):
            raise DomainError(f"N must be a power of two >= {MIN_N}, got {self.N}")

    @property
    def nodes(self) -> np.ndarray:
        return circle_nodes(self.N)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    est_error: float
    N_used: int


@dataclass(frozen=True)
class QuadratureControls:
    """Start size, refinement tolerance and node cap (per axis)."""

    N: int | None = None
    refine: float = DEFAULT_REFINE
    max_N: int | None = None

    def start(self, d: int) -> int:
        return self.N if self.N is not None else MIN_N

    def cap(self, d: int) -> int:
        return self.max_N if self.max_N is not None else DEFAULT_MAX_N[d]


@lru_cache(maxsize=64)
def circle_nodes(N: int) -> np.ndarray:
    nodes = np.exp(2j * np.pi * np.arange(N) / N)
    nodes.setflags(write=False)
    return nodes


def _converged(a, b, refine: float, scale) -> bool:
    return bool(np.all(np.abs(a - b) <= refine * np.maximum(np.abs(a), scale)))


def _refine_loop(estimate: Callable[[int], tuple], d: int, controls: QuadratureControls):
    """Double N until successive estimates agree.  estimate(N) -> (value, scale)."""
    N = max(controls.start(d), MIN_N)
    cap = controls.cap(d)
    if 2 * N > cap:
        # fixed-size rule: report the half-grid difference, no convergence test
        half, _ = estimate(max(N // 2, MIN_N // 2))
        cur, _ = estimate(N)
        return cur, np.abs(cur - half), N
    prev, _ = estimate(N)
    while True:
        N2 = 2 * N
        if N2 > cap:
            raise AccuracyError(
                f"quadrature did not converge to {controls.refine:g} within N={N} (d={d})",
                last=prev,
            )
        cur, scale = estimate(N2)
        if _converged(cur, prev, controls.refine, scale):
            return cur, np.abs(cur - prev), N2
        prev, N = cur, N2


def integrate_circle(f: Callable, d: int = 1, controls: QuadratureControls | None = None) -> QuadratureResult:
    """Trapezoid rule for oint...oint f(z_1..z_d) prod dz_i / (2 pi i z_i).

    f receives d broadcastable node arrays and must be vectorised.
    """
    controls = controls or QuadratureControls()
    if d == 0:
        return QuadratureResult(complex(f()), 0.0, 1)
    CircleGrid(MIN_N, d)

    def estimate(N):
        z = circle_nodes(N)
        axes = [z.reshape(tuple(N if k == i else 1 for k in range(d))) for i in range(d)]
        vals = np.broadcast_to(f(*axes), (N,) * d)
        # blocked, fixed-order reduction: last axis first
        total = vals
        for _ in range(d):
            total = total.sum(axis=-1)
        absum = np.abs(vals)
        for _ in range(d):
            absum = absum.sum(axis=-1)
        return complex(total) / N**d, float(absum) / N**d

    value, err, N = _refine_loop(estimate, d, controls)
    return QuadratureResult(complex(value), float(err), N)


def bc_sum(weights: np.ndarray, kernel: np.ndarray | None, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean over the d-fold grid of prod_i w(z_i) prod_{i<j} K(z_i, z_j).

    weights has shape (..., N) (leading axes are a batch); kernel is (N, N).
    Returns (value, mean of |integrand|), both with the batch shape.
    """
    N = weights.shape[-1]
    if d == 0:
        one = np.ones(weights.shape[:-1], dtype=complex)
        return one, np.abs(one)
    if d == 1:
        return weights.mean(axis=-1), np.abs(weights).mean(axis=-1)
    aw, ak = np.abs(weights), np.abs(kernel)
    if d == 2:
        val = np.einsum("...a,ab,...b->...", weights, kernel, weights, optimize=True) / N**2
        mag = np.einsum("...a,ab,...b->...", aw, ak, aw, optimize=True) / N**2
        return val, mag
    if d == 3:
        val = np.einsum("...a,...b,...c,ab,ac,bc->...", weights, weights, weights,
                        kernel, kernel, kernel, optimize=True) / N**3
        mag = np.einsum("...a,...b,...c,ab,ac,bc->...", aw, aw, aw, ak, ak, ak, optimize=True) / N**3
        return val, mag
    raise DomainError(f"dimension {d} unsupported (0..{MAX_DIM})")


def integrate_bc(weight_fn: Callable[[np.ndarray], np.ndarray],
                 kernel_fn: Callable[[int], np.ndarray] | None,
                 d: int,
                 controls: QuadratureControls | None = None) -> QuadratureResult:
    """Integrate prod_i w(z_i) prod_{i<j} K(z_i, z_j) over the unit d-torus.

    weight_fn(N) returns the per-variable weight on the N-point grid (possibly
    with leading batch axes); kernel_fn(N) the pair kernel matrix.  With a
    batch the result value is an array and convergence is required for every
    batch entry.
    """
    controls = controls or QuadratureControls()
    if d > MAX_DIM or d < 0:
        raise DomainError(f"dimension {d} unsupported (0..{MAX_DIM})")
    if d == 0:
        w = weight_fn(MIN_N)
        val = np.ones(np.shape(w)[:-1], dtype=complex)
        return QuadratureResult(val if val.ndim else complex(val), 0.0, 1)

    def estimate(N):
        kern = kernel_fn(N) if (kernel_fn is not None and d > 1) else None
        return bc_sum(weight_fn(N), kern, d)

    value, err, N = _refine_loop(estimate, d, controls)
    if np.ndim(value) == 0:
        return QuadratureResult(complex(value), float(err), N)
    return QuadratureResult(value, float(np.max(err)), N)

"""Parameter sets for the order-m elliptic Selberg family (t = q throughout)."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import BalancingError, ContourError, DomainError
from .kernel import nome

BALANCE_TOL = 1e-12
COLLISION_TOL = 1e-8
COLLISION_DEPTH = 4


@dataclass(frozen=True)
class ParameterSet:
    """Nomes p, q; order m; dimension n; parameters u_0..u_{2m+5}.

    Construction enforces q^{2n-2} prod(u) = (pq)^{m+1} to 1e-12 relative.
    """

    p: complex
    q: complex
    m: int
    n: int
    u: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", nome(self.p))
        object.__setattr__(self, "q", nome(self.q))
        object.__setattr__(self, "u", tuple(complex(x) for x in self.u))
        if self.m < 0 or self.n < 0:
            raise DomainError("m and n must be non-negative")
        if len(self.u) != 2 * self.m + 6:
            raise DomainError(f"order m={self.m} needs {2 * self.m + 6} parameters, got {len(self.u)}")
        if any(x == 0 for x in self.u):
            raise DomainError("parameters must be nonzero")
        err = balancing_residual(self.p, self.q, self.m, self.n, self.u)
        if err > BALANCE_TOL:
            raise BalancingError(f"balancing violated: relative residual {err:.3e}")

    @property
    def pq(self) -> complex:
        return self.p * self.q

    def with_u(self, u: Sequence[complex], n: int | None = None) -> "ParameterSet":
        return replace(self, u=tuple(u), n=self.n if n is None else n)


def balancing_residual(p, q, m, n, u) -> float:
    target = (p * q) ** (m + 1)
    got = q ** (2 * n - 2) * np.prod(np.asarray(u, dtype=complex))
    return float(abs(got - target) / abs(target))


def solve_last(p, q, m: int, n: int, head: Sequence[complex]) -> complex:
    """u_{2m+5} such that the full list satisfies the balancing condition."""
    if len(head) != 2 * m + 5:
        raise DomainError(f"autobalance needs {2 * m + 5} parameters, got {len(head)}")
    p, q = complex(p), complex(q)
    return (p * q) ** (m + 1) / (q ** (2 * n - 2) * np.prod(np.asarray(head, dtype=complex)))


@dataclass(frozen=True)
class ContourVerdict:
    ok: bool
    reason: str = ""
    index: tuple = ()

    def __bool__(self):
        return self.ok

    def raise_if_invalid(self):
        if not self.ok:
            raise ContourError(self.reason)


def check_contour(params: ParameterSet, extra: Sequence[complex] = ()) -> ContourVerdict:
    """Is the unit circle an admissible contour?

    Density parameters need |u_r| < 1; each extra pair (x, p/x) needs
    |p| < |x| < 1; and no p^i q^j q^k u_r u_s may come within 1e-8 of 1.
    """
    p, q = params.p, params.q
    for r, x in enumerate(params.u):
        if not abs(x) < 1.0:
            return ContourVerdict(False, f"|u[{r}]| = {abs(x):.6g} >= 1", (r,))
    for k, x in enumerate(extra):
        if not abs(p) < abs(x) < 1.0:
            return ContourVerdict(False, f"extra parameter {k} has |x| = {abs(x):.6g} outside (|p|, 1)", (k,))
    e = np.arange(COLLISION_DEPTH)
    shifts = (p ** e[:, None, None]) * (q ** e[None, :, None]) * (q ** e[None, None, :])
    u = params.u
    for r in range(len(u)):
        for s in range(r, len(u)):
            if np.min(np.abs(1.0 - shifts * u[r] * u[s])) <= COLLISION_TOL:
                return ContourVerdict(False, f"parameters {r},{s} collide: p^i q^j t^k u_r u_s ~ 1", (r, s))
    return ContourVerdict(True)

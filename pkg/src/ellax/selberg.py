"""Elliptic Selberg integrals of order m at t = q.

Every integral handled by the package is an instance of

    P_d * oint_{T^d} prod_{i<j} theta_p(z_i^{+-1} z_j^{+-1})
          prod_i Delta(z_i) prod_a theta_p(a z_i^{+-1}) / prod_b theta_p(b z_i^{+-1})

where P_d = ((p;p)(q;q)Gamma(q))^d / (2^d d!).  The numerator factors come
from parameter pairs (q a, pq/a) and the denominator factors from pairs
(b, p/b); the pair kernel is Gamma(q w)/Gamma(w) = theta_p(w).
:class:`SelbergEngine` caches the density and the pair kernel per grid size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernel as K
from .errors import DomainError
from .params import ParameterSet, check_contour
from .quadrature import MAX_DIM, QuadratureControls, QuadratureResult, circle_nodes, integrate_bc


def density(params: ParameterSet, z):
    """Delta(z) = prod_r Gamma(u_r z^{+-1}) / Gamma(z^{+-2}).

    1/Gamma(z^{+-2}) is evaluated as -z^{-2} theta_p(z^2) theta_q(z^2), which is
    the same function without the removable pole/zero pairing (so Delta(+-1) = 0).
    """
    p, q = params.p, params.q
    z = np.asarray(z, dtype=complex)
    out = -(z ** -2) * K.theta(p, z * z) * K.theta(q, z * z)
    for a in params.u:
        out = out * K.gamma_pm(p, q, a, z)
    return complex(out) if np.ndim(out) == 0 else out


def density_ratio_form(params: ParameterSet, z):
    """Delta(z) straight from the definition (poles of Gamma(z^{+-2}) raise)."""
    p, q = params.p, params.q
    z = np.asarray(z, dtype=complex)
    out = 1.0 / (K.gamma(p, q, z * z) * K.gamma(p, q, 1.0 / (z * z)))
    for a in params.u:
        out = out * K.gamma_pm(p, q, a, z)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass
class SelbergEngine:
    """Grid-cached evaluator for extended Selberg integrals over one ParameterSet."""

    params: ParameterSet
    controls: QuadratureControls = field(default_factory=QuadratureControls)
    validate: bool = True

    def __post_init__(self):
        if self.validate:
            check_contour(self.params).raise_if_invalid()
        p, q = self.params.p, self.params.q
        self._unit = K.euler(p) * K.euler(q) * K.gamma(p, q, q)
        self._density = {}
        self._kernel = {}
        self.last_N = 0
        self.max_error = 0.0

    def prefactor(self, d: int) -> complex:
        return self._unit ** d / (2 ** d * math.factorial(d))

    def density_table(self, N: int) -> np.ndarray:
        if N not in self._density:
            self._density[N] = density(self.params, circle_nodes(N))
        return self._density[N]

    def kernel_table(self, N: int) -> np.ndarray:
        if N not in self._kernel:
            t = K.theta(self.params.p, circle_nodes(N))
            idx = np.arange(N)
            s = idx[:, None] + idx[None, :]
            d = idx[:, None] - idx[None, :]
            self._kernel[N] = t[s % N] * t[(-s) % N] * t[d % N] * t[(-d) % N]
        return self._kernel[N]

    def integrate(self, d: int, numer=(), denom=()) -> QuadratureResult:
        """P_d times the integral; entries of numer may be 1-d arrays (a batch)."""
        if d < 0:
            raise DomainError("negative dimension")
        if d > MAX_DIM:
            raise DomainError(f"{d}-dimensional integrals unsupported (max {MAX_DIM})")
        p = self.params.p
        numer = [np.asarray(a, dtype=complex) for a in numer]
        denom = [complex(b) for b in denom]
        for b in denom:
            if not abs(p) < abs(b) < 1.0:
                raise DomainError(f"parameter pair ({b}, p/{b}) needs |p| < |b| < 1 on the unit circle")

        def weights(N):
            z = circle_nodes(N)
            w = self.density_table(N)
            for a in numer:
                w = w * K.theta_pm(p, a[..., None], z)
            for b in denom:
                w = w / K.theta_pm(p, b, z)
            return w

        res = integrate_bc(weights, self.kernel_table, d, self.controls)
        self.last_N = max(self.last_N, res.N_used)
        pref = self.prefactor(d)
        err = res.est_error * abs(pref)
        self.max_error = max(self.max_error, err)
        return QuadratureResult(res.value * pref, err, res.N_used)

    def value(self, d: int, numer=(), denom=()):
        return self.integrate(d, numer, denom).value

    def selberg(self) -> complex:
        return self.value(self.params.n)


def selberg(params: ParameterSet, controls: QuadratureControls | None = None) -> complex:
    """II^{(m)}_{n; q; p, q}(u) by tensor trapezoid quadrature (n <= 3)."""
    if params.n > MAX_DIM:
        raise DomainError(f"n = {params.n} > {MAX_DIM} unsupported")
    return SelbergEngine(params, controls or QuadratureControls()).selberg()


def selberg_closed_form_m0(params: ParameterSet) -> complex:
    """prod_{i<n} Gamma(q^{i+1}) prod_{r<s} Gamma(q^i u_r u_s) for m = 0."""
    if params.m != 0:
        raise DomainError("closed form exists only for m = 0")
    p, q, u = params.p, params.q, params.u
    out = 1.0 + 0j
    for i in range(params.n):
        out *= K.gamma(p, q, q ** (i + 1))
        for r, s in combinations(range(6), 2):
            out *= K.gamma(p, q, q ** i * u[r] * u[s])
    return out


def elliptic_beta_rhs(params: ParameterSet) -> complex:
    """prod_{r<s} Gamma(u_r u_s), the n = 1 right-hand side without Gamma(q)."""
    p, q, u = params.p, params.q, params.u
    return complex(np.prod([K.gamma(p, q, u[r] * u[s]) for r, s in combinations(range(len(u)), 2)]))


def e7_reflect(params: ParameterSet) -> ParameterSet:
    """Image of an order-1 parameter set under the E7 reflection.

    u'_r = u_r / x for r < 4 and u_r x for r >= 4, x = (u_0u_1u_2u_3 / (p q^{2-n}))^{1/2}
    (principal branch); preserves the balancing condition.
    """
    if params.m != 1:
        raise DomainError("E7 reflection is defined for m = 1")
    u, p, q, n = params.u, params.p, params.q, params.n
    x = np.sqrt(u[0] * u[1] * u[2] * u[3] / (p * q ** (2 - n)))
    return params.with_u([a / x for a in u[:4]] + [a * x for a in u[4:]])


def transform_9_7(params: ParameterSet, controls: QuadratureControls | None = None) -> tuple[complex, complex]:
    """Both sides of the order-1 transformation law.

    II_n(u) = prod_{1<=j<=n} prod_{r<s<4} Gamma(q^{n-j} u_r u_s) prod_{4<=r<s<8} Gamma(q^{n-j} u_r u_s) II_n(u')
    """
    if params.m != 1:
        raise DomainError("transformation law is for m = 1")
    if params.n > 2:
        raise DomainError("transform_9_7 supports n <= 2")
    controls = controls or QuadratureControls()
    image = e7_reflect(params)
    for ps in (params, image):
        check_contour(ps).raise_if_invalid()
    lhs = selberg(params, controls)
    p, q, u, n = params.p, params.q, params.u, params.n
    factor = 1.0 + 0j
    for j in range(1, n + 1):
        for block in (range(4), range(4, 8)):
            for r, s in combinations(block, 2):
                factor *= K.gamma(p, q, q ** (n - j) * u[r] * u[s])
    rhs = factor * selberg(image, controls)
    return lhs, rhs


def shifted_tau_params(p, q, n: int, u) -> ParameterSet:
    """ParameterSet of the integral inside the renormalised order-1 integral."""
    u = tuple(complex(a) for a in u)
    if len(u) != 8:
        raise DomainError("renormalised integral needs 8 parameters")
    sq = np.sqrt(complex(q))
    return ParameterSet(p, q, 1, n, tuple(sq * a for a in u))


def tau_renormalized(p, q, n: int, u, controls: QuadratureControls | None = None) -> complex:
    """II^{(1)}_n(q^{1/2} u) prod_{r<s} Gamma^+_{p,q,q}(q u_r u_s).

    ``u`` are the unshifted parameters; q^{1/2}u must be balanced and admit the unit circle.
    """
    shifted = shifted_tau_params(p, q, n, u)
    verdict = check_contour(shifted)
    if not verdict:
        raise DomainError(f"shifted parameters invalid: {verdict.reason}")
    p, q = shifted.p, shifted.q
    u = [complex(a) for a in u]
    norm = np.prod([K.gamma_plus(p, q, q, q * u[r] * u[s]) for r, s in combinations(range(8), 2)])
    return selberg(shifted, controls) * complex(norm)


def tau_e7_image(p, q, n: int, u) -> tuple:
    """Unshifted parameters whose shifted set is the E7 image of q^{1/2}u."""
    image = e7_reflect(shifted_tau_params(p, q, n, u))
    sq = np.sqrt(complex(q))
    return tuple(a / sq for a in image.u)

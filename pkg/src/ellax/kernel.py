"""Theta functions, elliptic gamma functions and infinite Pochhammer symbols.

All evaluators accept a scalar or an array for the main argument and return
the same shape.  Nomes are complex scalars with ``0 < |p| < 1``.

The infinite products are truncated: a factor ``1 - c*z`` is kept while
``|c| * max(|z|, |c0/z|)`` is at least ``policy.epsilon``, so large arguments
automatically pull in more factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleError

POLE_TOL = 1e-12


@dataclass(frozen=True)
class TruncationPolicy:
    epsilon: float = 1e-17
    max_terms: int = 1024

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_POLICY = TruncationPolicy()


def nome(p) -> complex:
    """Validate and return a nome as a Python complex."""
    p = complex(p)
    if not 0.0 < abs(p) < 1.0:
        raise DomainError(f"nome must satisfy 0 < |p| < 1, got {p!r}")
    return p


def _as_array(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("argument must be nonzero")
    return z


def _nterms(absp: float, scale: float, policy: TruncationPolicy) -> int:
    """Smallest K with absp**K * scale < epsilon, clamped to [1, max_terms]."""
    if scale <= 0.0:
        return 1
    k = math.ceil((math.log(policy.epsilon) - math.log(scale)) / math.log(absp))
    return int(min(max(k, 1), policy.max_terms))


def _product(factors: np.ndarray) -> np.ndarray:
    """Product along the last axis, falling back to log space on overflow."""
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        out = np.prod(factors, axis=-1)
    bad = ~np.isfinite(out)
    if np.any(bad) and np.all(np.isfinite(factors)):
        logs = np.sum(np.log(factors[bad]), axis=-1)
        out[bad] = np.exp(logs)
    return out


def _finish(out: np.ndarray, scalar: bool):
    return complex(out) if scalar else out


def theta(p, z, policy: TruncationPolicy = DEFAULT_POLICY):
    """theta_p(z) = prod_{i>=0} (1 - p^{i+1}/z)(1 - p^i z)."""
    p = nome(p)
    scalar = np.ndim(z) == 0
    z = _as_array(z)
    if z.size == 0:
        return z.copy()
    absz = np.abs(z)
    scale = max(float(absz.max()), abs(p) / float(absz.min()))
    k = _nterms(abs(p), scale, policy)
    powers = p ** np.arange(k)
    zz = z[..., None]
    factors = (1.0 - p * powers / zz) * (1.0 - powers * zz)
    return _finish(_product(factors), scalar)


def theta_pm(p, a, z, policy: TruncationPolicy = DEFAULT_POLICY):
    """theta_p(a z) theta_p(a / z), the z^{+-1} product convention."""
    z = np.asarray(z, dtype=complex)
    out = theta(p, a * z, policy) * theta(p, a / z, policy)
    return out


def psi(p, x, z, policy: TruncationPolicy = DEFAULT_POLICY):
    """psi_p(x, z) = x^{-1} theta_p(x z) theta_p(x / z); antisymmetric in (x, z)."""
    if np.any(np.asarray(x) == 0) or np.any(np.asarray(z) == 0):
        raise DomainError("psi requires nonzero arguments")
    return theta(p, np.multiply(x, z), policy) * theta(p, np.divide(x, z), policy) / x


def _pair_coefficients(p: complex, q: complex, scale: float, policy: TruncationPolicy):
    """Coefficients p^i q^j (lexicographic in i, j) with |p^i q^j| * scale >= eps."""
    ap, aq = abs(p), abs(q)
    ki = _nterms(ap, scale, policy)
    kj = _nterms(aq, scale, policy)
    i = np.arange(ki)[:, None]
    j = np.arange(kj)[None, :]
    keep = (ap ** i) * (aq ** j) * scale >= policy.epsilon
    keep[0, 0] = True
    ii, jj = np.nonzero(keep)
    return (p ** ii) * (q ** jj), ii, jj


def _check_poles(z: np.ndarray, coeffs: np.ndarray, ii, jj):
    dist = np.abs(1.0 - coeffs * z[..., None])
    if dist.size and dist.min() < POLE_TOL:
        flat = np.unravel_index(np.argmin(dist), dist.shape)
        k = flat[-1]
        zbad = complex(z[flat[:-1]]) if z.ndim else complex(z)
        raise PoleError(zbad, int(ii[k]), int(jj[k]))


def gamma(p, q, z, policy: TruncationPolicy = DEFAULT_POLICY):
    """Elliptic gamma function Gamma_{p,q}(z).

    Raises PoleError when z is within 1e-12 (relative) of some p^{-i} q^{-j}.
    """
    p, q = nome(p), nome(q)
    scalar = np.ndim(z) == 0
    z = _as_array(z)
    if z.size == 0:
        return z.copy()
    absz = np.abs(z)
    scale = max(float(absz.max()), abs(p * q) / float(absz.min()), 1.0)
    coeffs, ii, jj = _pair_coefficients(p, q, scale, policy)
    _check_poles(z, coeffs, ii, jj)
    zz = z[..., None]
    factors = (1.0 - p * q * coeffs / zz) / (1.0 - coeffs * zz)
    return _finish(_product(factors), scalar)


def gamma_pm(p, q, a, z, policy: TruncationPolicy = DEFAULT_POLICY):
    """Gamma_{p,q}(a z^{+-1}) = Gamma(a z) Gamma(a / z)."""
    z = np.asarray(z, dtype=complex)
    return gamma(p, q, a * z, policy) * gamma(p, q, a / z, policy)


def gamma_plus(p, q, t, x, policy: TruncationPolicy = DEFAULT_POLICY):
    """Third-order elliptic gamma function Gamma^+_{p,q,t}(x)."""
    p, q, t = nome(p), nome(q), nome(t)
    scalar = np.ndim(x) == 0
    x = _as_array(x)
    if x.size == 0:
        return x.copy()
    absx = np.abs(x)
    scale = max(float(absx.max()), abs(p * q * t) / float(absx.min()), 1.0)
    ap, aq, at = abs(p), abs(q), abs(t)
    ki, kj, kk = (_nterms(a, scale, policy) for a in (ap, aq, at))
    i = np.arange(ki)[:, None, None]
    j = np.arange(kj)[None, :, None]
    k = np.arange(kk)[None, None, :]
    keep = (ap ** i) * (aq ** j) * (at ** k) * scale >= policy.epsilon
    keep[0, 0, 0] = True
    ii, jj, kk_ = np.nonzero(keep)
    coeffs = (p ** ii) * (q ** jj) * (t ** kk_)
    xx = x[..., None]
    factors = (1.0 - coeffs * xx) * (1.0 - p * q * t * coeffs / xx)
    return _finish(_product(factors), scalar)


def pochhammer(x, p, policy: TruncationPolicy = DEFAULT_POLICY):
    """Infinite q-Pochhammer (x; p) = prod_{k>=0} (1 - x p^k)."""
    p = nome(p)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=complex)
    scale = max(float(np.abs(x).max()) if x.size else 0.0, 1e-300)
    k = _nterms(abs(p), scale, policy)
    factors = 1.0 - x[..., None] * p ** np.arange(k)
    return _finish(_product(factors), scalar)


def euler(p, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """(p; p) = prod_{k>=1} (1 - p^k)."""
    return pochhammer(p, p, policy)


def pochhammer2(x, p, q, policy: TruncationPolicy = DEFAULT_POLICY):
    """Double Pochhammer (x; p, q) = prod_{i,j>=0} (1 - p^i q^j x)."""
    p, q = nome(p), nome(q)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=complex)
    scale = max(float(np.abs(x).max()) if x.size else 0.0, 1e-300)
    coeffs, _, _ = _pair_coefficients(p, q, scale, policy)
    factors = 1.0 - coeffs * x[..., None]
    return _finish(_product(factors), scalar)

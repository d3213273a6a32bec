"""Fundamental matrix M_n, shift matrices A~_n and B~_n, isomonodromy moves.

All matrices are plain 2x2 numpy arrays wrapped in :class:`Matrix2C` only at
the API boundary.  Points outside the evaluation annulus are reached through
the x -> 1/x and x -> px laws of F and F+ (see :mod:`ellax.biorth`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernel as K
from .biorth import ArgumentPoint, BiorthContext, as_point, hat, plain
from .errors import DomainError, SingularContextError
from .params import ParameterSet, check_contour
from .quadrature import QuadratureControls
from .selberg import density

J = np.array([[0, -1], [1, 0]], dtype=complex)
J_INV = np.array([[0, 1], [-1, 0]], dtype=complex)
REFLECT = np.array([[1, 1], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Matrix2C:
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def of(cls, arr) -> "Matrix2C":
        arr = np.asarray(arr, dtype=complex)
        return cls(complex(arr[0, 0]), complex(arr[0, 1]), complex(arr[1, 0]), complex(arr[1, 1]))

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "Matrix2C":
        det = self.det
        if abs(det) <= 1e-300:
            raise SingularContextError("matrix is singular")
        return Matrix2C(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def __matmul__(self, other: "Matrix2C") -> "Matrix2C":
        return Matrix2C.of(self.array @ other.array)


def inv2(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) <= 1e-300:
        raise SingularContextError("matrix is singular")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def det2(m: np.ndarray) -> complex:
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def mat_residual(x, y) -> float:
    """max |x - y| over max entry magnitude of x and y."""
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    scale = max(np.abs(x).max(), np.abs(y).max())
    if scale == 0.0:
        return 0.0
    return float(np.abs(x - y).max() / scale)


def scalar_residual(x: complex, y: complex) -> float:
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0.0 else float(abs(x - y) / scale)


@dataclass(frozen=True)
class ShiftVector:
    """Shift (u_r, z, n) -> (q^{k_r} u_r, q^l z, n + nu) in the D+ lattice."""

    k: tuple
    l: Fraction
    nu: int

    def __post_init__(self):
        k = tuple(Fraction(x).limit_denominator(2) for x in self.k)
        l = Fraction(self.l).limit_denominator(2)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        if l.denominator not in (1, 2):
            raise DomainError("l must be a half-integer")
        for x in k:
            if x.denominator not in (1, 2) or (x - l).denominator != 1:
                raise DomainError("every k_r must be congruent to l mod 1")
        if 2 * self.nu + sum(k) != 0:
            raise DomainError("2 nu + sum k must vanish")

    def apply(self, params: ParameterSet) -> ParameterSet:
        if len(self.k) != len(params.u):
            raise DomainError("shift vector length does not match the parameters")
        sq = np.sqrt(complex(params.q))
        u = [a * sq ** int(2 * k) for a, k in zip(params.u, self.k)]
        return params.with_u(u, n=params.n + self.nu)


def sample_points(seed: int, count: int = 8) -> list[complex]:
    """Deterministic sample z with |z| in [0.3, 0.45] or [0.78, 0.9].

    These radii keep z, qz, 1/qz and their annulus images away from the
    boundary circles for the default nomes.
    """
    rng = np.random.default_rng(seed)
    pts = []
    for i in range(count):
        lo, hi = (0.3, 0.45) if i % 2 == 0 else (0.78, 0.9)
        pts.append(complex(rng.uniform(lo, hi) * np.exp(2j * np.pi * rng.uniform())))
    return pts


def _prod_theta(p, values) -> complex:
    out = 1.0 + 0j
    for x in values:
        out *= K.theta(p, x)
    return out


class LaxContext:
    """A BiorthContext with a chosen pair (v, w) and F+_n(v, w) != 0."""

    def __init__(self, bctx: BiorthContext, v, w):
        self.bctx = bctx
        self.v = as_point(v)
        self.w = as_point(w)
        self.norm = bctx.II() * bctx.Fplus(self.v, self.w)
        if abs(self.norm) < 1e-300 or not np.isfinite(self.norm):
            raise SingularContextError("II_n F+_n(v, w) vanishes; M is singular")

    @classmethod
    def build(cls, params: ParameterSet, v, w, controls: QuadratureControls | None = None) -> "LaxContext":
        return cls(BiorthContext(params, controls), v, w)

    @property
    def params(self) -> ParameterSet:
        return self.bctx.params

    @property
    def p(self):
        return self.bctx.p

    @property
    def q(self):
        return self.bctx.q

    @property
    def n(self):
        return self.bctx.n

    @property
    def m(self):
        return self.params.m

    # -- fundamental matrix ---------------------------------------------------

    def M(self, z: complex) -> np.ndarray:
        """M_n(z; v, w)."""
        b, p = self.bctx, self.p
        col = z ** -1 * K.theta(p, z * z) / density(self.params, z)
        return np.array([[b.F(z, self.v), col * b.Fplus(z, self.v)],
                         [b.F(z, self.w), col * b.Fplus(z, self.w)]], dtype=complex)

    def det_M_formula(self, z: complex) -> complex:
        return self.norm * z ** -1 * K.theta(self.p, z * z) / density(self.params, z)

    def check_det_M(self, z: complex) -> float:
        return scalar_residual(det2(self.M(z)), self.det_M_formula(z))

    def check_M_reflection(self, z: complex) -> float:
        return mat_residual(self.M(1.0 / z), self.M(z) @ REFLECT)

    def p_shift_T(self, z: complex) -> np.ndarray:
        """T(z) with M(pz) = M(z)T(z).

        Second column is (-r, r), r = (pz^2)^{n-2} Delta(z)/Delta(pz): it follows
        from F+(pz) = (pz^2)^n (F+(z) + J F(z)) and z^{-1} theta_p(z^2) J = -Delta(z).
        """
        p, n = self.p, self.n
        s = p * z * z
        r = s ** (n - 2) * density(self.params, z) / density(self.params, p * z)
        return np.array([[s ** (-n), -r], [0, r]], dtype=complex)

    def check_p_shift_of_M(self, z: complex) -> tuple[float, float]:
        """Residuals of M(pz) = M(z)T(z) and of its determinant."""
        lhs = self.M(self.p * z)
        T = self.p_shift_T(z)
        rhs = self.M(z) @ T
        det_res = scalar_residual(det2(lhs), self.det_M_formula(z) * det2(T))
        return mat_residual(lhs, rhs), det_res

    # -- A~ -----------------------------------------------------------------

    def a_coef(self, z):
        return self.q ** -1 * z ** -2 * _prod_theta(self.p, [r * z for r in self.params.u]) / self.norm

    def b_coef(self, z):
        return self.q * z * z * _prod_theta(self.p, [r / (self.q * z) for r in self.params.u]) / self.norm

    def Atilde(self, z: complex) -> np.ndarray:
        """Factored form of A~_n(z; v, w)."""
        b, q = self.bctx, self.q
        v, w = self.v, self.w
        a_z, b_z = self.a_coef(z), self.b_coef(z)
        left = np.array([[b.F(q * z, v), b_z * b.Fplus(q * z, v)],
                         [b.F(q * z, w), b_z * b.Fplus(q * z, w)]], dtype=complex)
        right = np.array([[a_z * b.Fplus(z, w), -a_z * b.Fplus(z, v)],
                          [-b.F(z, w), b.F(z, v)]], dtype=complex)
        return left @ right

    def Atilde_direct(self, z: complex) -> np.ndarray:
        """q^{-1} z^{-2} prod theta_p(u_r z) M(qz) M(z)^{-1}."""
        pref = self.q ** -1 * z ** -2 * _prod_theta(self.p, [r * z for r in self.params.u])
        return pref * self.M(self.q * z) @ inv2(self.M(z))

    def A(self, z: complex) -> np.ndarray:
        return self.M(self.q * z) @ inv2(self.M(z))

    def det_Atilde_formula(self, z: complex) -> complex:
        p, q = self.p, self.q
        return _prod_theta(p, [r * z for r in self.params.u] + [r / (q * z) for r in self.params.u])

    def check_Atilde(self, z: complex) -> dict:
        p, q, m = self.p, self.q, self.m
        At = self.Atilde(z)
        At_inv_pt = self.Atilde(1.0 / (q * z))
        return {
            "factored_vs_direct": mat_residual(At, self.Atilde_direct(z)),
            "det": scalar_residual(det2(At), self.det_Atilde_formula(z)),
            "p_law": mat_residual(self.Atilde(p * z), (p * q * z * z) ** (-m - 3) * At),
            "symmetry": mat_residual(At_inv_pt, J @ At.T @ J_INV),
            "inverse": mat_residual(At_inv_pt @ At, det2(At) * np.eye(2)),
        }

    def Atilde_at(self, z: complex, via_p: bool = False) -> np.ndarray:
        """A~ at z, optionally computed at z*p and pulled back with the p-theta law."""
        if not via_p:
            return self.Atilde(z)
        p, q, m = self.p, self.q, self.m
        # A~(pz) = (pqz^2)^{-m-3} A~(z)
        return (p * q * z * z) ** (m + 3) * self.Atilde(p * z)

    def special_values_A(self) -> list[dict]:
        """Residuals of the 2(2m+6) rank-one values and the 4 ramification values."""
        b, p, q, n = self.bctx, self.p, self.q, self.n
        u = self.params.u
        out = []
        for s, us in enumerate(u):
            scal = q * us ** -2 * _prod_theta(p, [r * us / q for r in u]) / self.norm
            col = np.array([b.F(us, self.v), b.F(us, self.w)])
            row = np.array([b.Fplus(us / q, self.w), -b.Fplus(us / q, self.v)])
            expect = scal * np.outer(col, row)
            got = self.Atilde(us / q)
            out.append({"name": f"A(u{s}/q)", "point": us / q, "residual": mat_residual(got, expect),
                        "rank": abs(det2(got)) / max(np.abs(got).max() ** 2, 1e-300)})
            col = np.array([b.Fplus(us / q, self.v), b.Fplus(us / q, self.w)])
            row = np.array([-b.F(us, self.w), b.F(us, self.v)])
            expect = scal * np.outer(col, row)
            # F+ has poles at 1/u_s, so evaluate at p/u_s and use the p-theta law
            got = self.Atilde_at(1.0 / us, via_p=True)
            out.append({"name": f"A(1/u{s})", "point": 1.0 / us, "residual": mat_residual(got, expect),
                        "rank": abs(det2(got)) / max(np.abs(got).max() ** 2, 1e-300)})
        sq = np.sqrt(complex(q))
        spq = np.sqrt(complex(p / q))
        for label, z, scal in (
            ("A(q^-1/2)", 1 / sq, _prod_theta(p, [r / sq for r in u])),
            ("A(-q^-1/2)", -1 / sq, _prod_theta(p, [-r / sq for r in u])),
            ("A((p/q)^1/2)", spq, q ** -n / p * _prod_theta(p, [r * spq for r in u])),
            ("A(-(p/q)^1/2)", -spq, q ** -n / p * _prod_theta(p, [-r * spq for r in u])),
        ):
            got = self.Atilde(z)
            out.append({"name": label, "point": z, "residual": mat_residual(got, scal * np.eye(2))})
        return out

    def holomorphy_probe(self, z0: complex, radii=(1e-2, 1e-4), count: int = 8) -> float:
        """Ratio of max |A~| on a small ring around z0 for the smallest vs largest radius.

        Radii are relative to |z0|.

        Bounded ratios near the candidate poles are a proxy for holomorphy.
        """
        phases = np.exp(2j * np.pi * (np.arange(count) + 0.5) / count)
        peaks = []
        for r in radii:
            peaks.append(max(np.abs(self.Atilde(z0 * (1 + r * ph))).max() for ph in phases))
        return float(peaks[-1] / peaks[0])

    # -- isomonodromy ----------------------------------------------------------

    def transform_vw(self, v2, w2) -> np.ndarray:
        b = self.bctx
        v2, w2 = as_point(v2), as_point(w2)
        f = b.Fplus
        return np.array([[f(v2, self.w), -f(v2, self.v)],
                         [f(w2, self.w), -f(w2, self.v)]], dtype=complex) / b.Fplus(self.v, self.w)

    def apply_isomono_vw(self, v2, w2, zs: Sequence[complex]) -> tuple[Matrix2C, float]:
        T = self.transform_vw(v2, w2)
        other = LaxContext(self.bctx, v2, w2)
        res = max(mat_residual(other.M(z), T @ self.M(z)) for z in zs)
        return Matrix2C.of(T), res

    def check_Atilde_basis_change(self, v2, w2, zs: Sequence[complex]) -> float:
        """A~ built from (v', w') equals T A~ T^{-1} with T from the (v, w) -> (v', w') move."""
        T = self.transform_vw(v2, w2)
        other = LaxContext(self.bctx, v2, w2)
        Ti = inv2(T)
        return max(mat_residual(other.Atilde(z), T @ self.Atilde(z) @ Ti) for z in zs)

    # -- apparent singularities --------------------------------------------------

    def apparent_singularity_wrap(self, x: complex, z: complex) -> np.ndarray:
        """M'_n(z; x) = Gamma(x z^{+-1}) / Gamma(q^n x z^{+-1}) M_n(z)."""
        p, q, n = self.p, self.q, self.n
        ratio = K.gamma_pm(p, q, x, z) / K.gamma_pm(p, q, q ** n * x, z)
        return ratio * self.M(z)

    def A_prime(self, x: complex, z: complex) -> np.ndarray:
        p, q, n = self.p, self.q, self.n
        fac = (K.theta(p, x * z) * K.theta(p, q ** (n - 1) * x / z)
               / (K.theta(p, q ** n * x * z) * K.theta(p, x / (q * z))))
        return fac * self.A(z)

    def check_apparent(self, x: complex, z: complex) -> dict:
        """A'(pz) = A'(z), and M'(qz)M'(z)^{-1} agrees with A'."""
        Mp = self.apparent_singularity_wrap(x, self.q * z) @ inv2(self.apparent_singularity_wrap(x, z))
        Az = self.A_prime(x, z)
        return {"elliptic": mat_residual(self.A_prime(x, self.p * z), Az),
                "wrap": mat_residual(Mp, Az)}


def _prime_u(params: ParameterSet) -> ParameterSet:
    m = params.m
    sq = np.sqrt(complex(params.q))
    u = [a * sq for a in params.u[: m + 3]] + [a / sq for a in params.u[m + 3:]]
    return params.with_u(u)


class BContext:
    """Half-integer shift B~_n(z; v, w; v', w') between parameters u and u'."""

    def __init__(self, lax: LaxContext, v2, w2):
        self.lax = lax
        self.prime_params = _prime_u(lax.params)
        check_contour(self.prime_params).raise_if_invalid()
        self.gctx = BiorthContext(self.prime_params, lax.bctx.controls)
        self.sq = np.sqrt(complex(lax.q))
        self.v2 = as_point(v2)
        self.w2 = as_point(w2)
        self.norm_prime = self.gctx.II() * self.G_plus(self.v2, self.w2)
        if abs(self.norm_prime) < 1e-300:
            raise SingularContextError("II_n(u') G+_n(v', w') vanishes")
        self.prime_lax = LaxContext(self.gctx, self.v2.scaled(self.sq), self.w2.scaled(self.sq))

    @property
    def p(self):
        return self.lax.p

    @property
    def q(self):
        return self.lax.q

    def G(self, x, v) -> complex:
        """G_n(x; v) = F_n(q^{1/2}x; q^{1/2}v; u')."""
        return self.gctx.F(self.sq * x, as_point(v).scaled(self.sq))

    def G_plus(self, a, b) -> complex:
        a, b = as_point(a), as_point(b)
        return self.gctx.Fplus(a.scaled(self.sq), b.scaled(self.sq))

    def c_coef(self, z):
        L = self.lax
        m = L.m
        return (self.sq * z) ** -1 * _prod_theta(self.p, [r * z for r in L.params.u[: m + 3]]) / L.norm

    def d_coef(self, z):
        L = self.lax
        m = L.m
        return -z * _prod_theta(self.p, [r / (self.q * z) for r in L.params.u[m + 3:]]) / L.norm

    def Btilde(self, z: complex) -> np.ndarray:
        L, b = self.lax, self.lax.bctx
        c, d = self.c_coef(z), self.d_coef(z)
        left = np.array([[self.G(z, self.v2), d * self.G_plus(z, self.v2)],
                         [self.G(z, self.w2), d * self.G_plus(z, self.w2)]], dtype=complex)
        right = np.array([[c * b.Fplus(z, L.w), -c * b.Fplus(z, L.v)],
                          [-b.F(z, L.w), b.F(z, L.v)]], dtype=complex)
        return left @ right

    def B(self, z: complex) -> np.ndarray:
        return self.prime_lax.M(self.sq * z) @ inv2(self.lax.M(z))

    def Btilde_direct(self, z: complex) -> np.ndarray:
        m = self.lax.m
        pref = (self.sq * z) ** -1 * _prod_theta(self.p, [r * z for r in self.lax.params.u[: m + 3]])
        return pref * self.B(z)

    def p_multiplier(self) -> complex:
        L = self.lax
        m = L.m
        return self.q ** -L.n / self.p * (-1) ** (m + 3) / np.prod(L.params.u[: m + 3])

    def det_formula(self, z: complex) -> complex:
        L, m = self.lax, self.lax.m
        u = L.params.u
        return (-1 / self.sq * self.norm_prime / L.norm
                * _prod_theta(self.p, [r * z for r in u[: m + 3]])
                * _prod_theta(self.p, [r / (self.q * z) for r in u[m + 3:]]))

    def relation_constant(self) -> complex:
        return -1 / self.sq * self.norm_prime / self.lax.norm

    def check_Btilde(self, z: complex) -> dict:
        p, q, m = self.p, self.q, self.lax.m
        Bt = self.Btilde(z)
        Bq = self.Btilde(1.0 / (q * z))
        return {
            "factored_vs_direct": mat_residual(Bt, self.Btilde_direct(z)),
            "det": scalar_residual(det2(Bt), self.det_formula(z)),
            "p_law": mat_residual(self.Btilde(p * z), self.p_multiplier() * z ** (-m - 3) * Bt),
            "A_relation": mat_residual(J @ Bq.T @ J_INV @ Bt, self.relation_constant() * self.lax.Atilde(z)),
            "B_inverse": mat_residual(inv2(self.B(1.0 / (q * z))) @ self.B(z), self.lax.A(z)),
        }

    def special_values_B(self) -> list[dict]:
        L, b = self.lax, self.lax.bctx
        p, q, m = self.p, self.q, L.m
        u = L.params.u
        out = []
        for s, us in enumerate(u):
            if s < m + 3:
                scal = -us ** -1 * _prod_theta(p, [r * us / q for r in u[m + 3:]]) / L.norm
                col = np.array([self.G_plus(us / q, self.v2), self.G_plus(us / q, self.w2)])
                row = np.array([-b.F(us, L.w), b.F(us, L.v)])
                # B~(p/u_s) = K u_s^{m+3} B~(1/u_s); the 1/u_s point is a pole of the factors
                got = self.Btilde(p / us) / (self.p_multiplier() * us ** (m + 3))
                name = f"B(1/u{s})"
                point = 1.0 / us
            else:
                scal = (us / self.sq) ** -1 * _prod_theta(p, [r * us / q for r in u[: m + 3]]) / L.norm
                col = np.array([self.G(us / q, self.v2), self.G(us / q, self.w2)])
                row = np.array([b.Fplus(us / q, L.w), -b.Fplus(us / q, L.v)])
                got = self.Btilde(us / q)
                name = f"B(u{s}/q)"
                point = us / q
            expect = scal * np.outer(col, row)
            out.append({"name": name, "point": point, "residual": mat_residual(got, expect),
                        "rank": abs(det2(got)) / max(np.abs(got).max() ** 2, 1e-300)})
        return out


def build_Btilde(lax: LaxContext, v2, w2, z: complex) -> Matrix2C:
    return Matrix2C.of(BContext(lax, v2, w2).Btilde(z))


# -- integer isomonodromy shifts -------------------------------------------------


def isomono_ud_params(params: ParameterSet) -> ParameterSet:
    u = list(params.u)
    q = params.q
    u[0], u[1] = q * u[0], u[1] / q
    return params.with_u(u)


def isomono_uu_params(params: ParameterSet) -> ParameterSet:
    if params.n < 1:
        raise DomainError("the uu shift lowers n and needs n >= 1")
    u = list(params.u)
    q = params.q
    u[0], u[1] = q * u[0], q * u[1]
    return params.with_u(u, n=params.n - 1)


def _checked(params: ParameterSet, label: str) -> ParameterSet:
    verdict = check_contour(params)
    if not verdict:
        raise DomainError(f"{label} parameters invalid: {verdict.reason}")
    return params


def apply_isomono_integer(params: ParameterSet, which: str, zs: Sequence[complex],
                          controls: QuadratureControls | None = None) -> float:
    """Max residual over zs of the ud or uu matrix identity."""
    p, q, n = params.p, params.q, params.n
    u0, u1 = params.u[0], params.u[1]
    base = BiorthContext(_checked(params, "original"), controls)
    if which == "ud":
        shifted = BiorthContext(_checked(isomono_ud_params(params), "shifted"), controls)
        lhs_ctx = LaxContext(shifted, plain(u0), hat(u1 / q))
        rhs_ctx = LaxContext(base, plain(u1 / q), hat(u0))

        def factor(z):
            return (u0 * q / u1) ** n * np.diag([1.0, K.theta_pm(p, u1 / q, z) / K.theta_pm(p, u0, z)])
    elif which == "uu":
        shifted = BiorthContext(_checked(isomono_uu_params(params), "shifted"), controls)
        lhs_ctx = LaxContext(shifted, plain(u0), plain(u1))
        rhs_ctx = LaxContext(base, hat(u1), hat(u0))

        # overall sign -1: both columns of M_n(z; u1^, u0^) come out negated otherwise
        def factor(z):
            return -(u0 * u1) ** (n - 1) * np.diag([u1 / K.theta_pm(p, u1, z), u0 / K.theta_pm(p, u0, z)])
    else:
        raise DomainError(f"unknown integer shift {which!r} (ud or uu)")
    return max(mat_residual(lhs_ctx.M(z), factor(z) @ rhs_ctx.M(z)) for z in zs)


# -- bilinear relation from B~ -------------------------------------------------------


def _lagrange_basis(p, nodes: Sequence[complex], last: complex):
    """Degree-len(nodes) theta functions L_k vanishing at the other nodes.

    L_k(z) = prod_{j != k} theta_p(z / zeta_j) * theta_p(c_k z) with c_k fixed by
    prod of all factor parameters = ``last`` (the multiplier constraint).
    """
    funcs = []
    for k in range(len(nodes)):
        others = [1.0 / nodes[j] for j in range(len(nodes)) if j != k]
        c = last / np.prod(others) if others else last
        funcs.append(others + [c])
    return funcs


def fay_from_B(lax: LaxContext, nodes: str = "auto") -> dict:
    """Residual of the bilinear identity obtained by interpolating the 11 entry of B~.

    The entry f(z) = (q^{1/2}z)^{-1} prod_{r<m+3} theta_p(u_r z) G(z;v')F+(z,w)
    + z prod_{r>=m+3} theta_p(u_r/qz) G+(z,v')F(z;w) (B~_11 without its
    normalisation) is a p-theta function of degree m+3, hence determined by
    its values at m+3 generic points.  With v' = u_0/q and w = u_1^ the
    s = 0, 1 terms vanish.  Values at 1/u_s and u_t/q come from the special
    value formulas, so the identity is one among Selberg-type integrals.

    At n = 0 the nodes 1/u_s (s < m+3) are not unisolvent (f itself vanishes
    on them), so 1/u_{m+2} is swapped for u_{m+4}/q.
    """
    params = lax.params
    p, q, m, n = params.p, params.q, params.m, params.n
    u = params.u
    bc = BContext(LaxContext(lax.bctx, lax.v, hat(u[1])), plain(u[0] / q), lax.w)
    b = lax.bctx
    v2, w = plain(u[0] / q), hat(u[1])
    sq = bc.sq

    def val_inv(s):  # f(1/u_s), s < m+3
        us = u[s]
        return us ** -1 * _prod_theta(p, [r * us / q for r in u[m + 3:]]) * bc.G_plus(us / q, v2) * b.F(us, w)

    def val_q(t):  # f(u_t/q), t >= m+3
        ut = u[t]
        return (ut / sq) ** -1 * _prod_theta(p, [r * ut / q for r in u[: m + 3]]) * bc.G(ut / q, v2) * b.Fplus(ut / q, w)

    if nodes == "auto":
        nodes = "swap" if n == 0 else "default"
    node_list = [("inv", s) for s in range(m + 3)]
    if nodes == "swap":
        node_list[-1] = ("q", m + 4)
    elif nodes != "default":
        raise DomainError("nodes must be 'auto', 'default' or 'swap'")
    zeta = [1.0 / u[s] if kind == "inv" else u[s] / q for kind, s in node_list]
    values = [val_inv(s) if kind == "inv" else val_q(s) for kind, s in node_list]
    last = p * q ** n * np.prod(u[: m + 3])
    target = u[m + 3] / q
    terms = []
    for params_k, zk, fk in zip(_lagrange_basis(p, zeta, last), zeta, values):
        num = _prod_theta(p, [a * target for a in params_k])
        den = _prod_theta(p, [a * zk for a in params_k])
        terms.append(fk * num / den)
    lhs = val_q(m + 3)
    total = lhs - sum(terms)
    scale = max([abs(lhs)] + [abs(t) for t in terms])
    return {"residual": float(abs(total) / scale) if scale else 0.0, "lhs": lhs,
            "terms": terms, "nodes": node_list}


def check_B_prime(bc: BContext, x: complex, z: complex) -> float:
    """B' built from the wrapped matrices M' against the Gamma-ratio prefactor times B.

    The u -> u' move is the shift l = l' = 1/2, nu = 0.
    """
    L = bc.lax
    p, q, n, sq = L.p, L.q, L.n, bc.sq
    direct = bc.prime_lax.apparent_singularity_wrap(sq * x, sq * z) @ inv2(L.apparent_singularity_wrap(x, z))
    g = K.gamma
    fac = (g(p, q, q * x * z) * g(p, q, x / z) / (g(p, q, x * z) * g(p, q, x / z))
           * g(p, q, q ** n * x * z) * g(p, q, q ** n * x / z)
           / (g(p, q, q ** (n + 1) * x * z) * g(p, q, q ** n * x / z)))
    return mat_residual(direct, fac * bc.B(z))

"""Semiclassical biorthogonal functions F_n, F+_n, F-_n and their identities.

Arguments of F+_n live on C* u C*: a point is either plain or hatted, with

    F+_n(v^, w) = F_n(v; w),  F+_n(v, w^) = -F_n(w; v),  F+_n(v^, w^) = F-_n(v, w),

so F_n(x; v) is F+_n(x^, v).  Plain arguments are evaluated by quadrature on
the unit circle only inside the annulus |p| < |x| < 1; anything else is
brought there with

    F+_n(p/x, v) = (p/x^2)^n F+_n(x, v)
    F+_n(1/x, v) = F+_n(x, v) + x^{-1} theta_q(x^2) F_n(x; v) prod_r Gamma(u_r x^{+-1})

and antisymmetry.  :meth:`BiorthContext.fplus_continued` provides an
independent route outside the unit circle (explicit contour deformation)
used to check the second relation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernel as K
from .bctheta import BC1Theta
from .errors import ContourError, DomainError
from .params import ParameterSet, check_contour
from .quadrature import QuadratureControls, circle_nodes
from .selberg import SelbergEngine, density

ANNULUS_GUARD = 1e-9


@dataclass(frozen=True)
class ArgumentPoint:
    value: complex
    hatted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        if self.value == 0:
            raise DomainError("argument points must be nonzero")

    @property
    def kind(self) -> str:
        return "hatted" if self.hatted else "plain"

    def scaled(self, c: complex) -> "ArgumentPoint":
        return ArgumentPoint(self.value * c, self.hatted)

    def __repr__(self):
        return f"{'^' if self.hatted else ''}{self.value}"


def plain(x) -> ArgumentPoint:
    return ArgumentPoint(x, False)


def hat(x) -> ArgumentPoint:
    return ArgumentPoint(x, True)


def as_point(x) -> ArgumentPoint:
    return x if isinstance(x, ArgumentPoint) else plain(x)


def relative_residual(total: complex, terms: Sequence[complex]) -> float:
    """|total| divided by the largest term magnitude (0 if all terms vanish)."""
    scale = max((abs(t) for t in terms), default=0.0)
    if scale == 0.0:
        return float(abs(total))
    return float(abs(total) / scale)


class BiorthContext:
    """F_n, F+_n, F-_n for one ParameterSet, sharing a grid-cached engine."""

    def __init__(self, params: ParameterSet, controls: QuadratureControls | None = None):
        self.params = params
        self.controls = controls or QuadratureControls()
        self.engine = SelbergEngine(params, self.controls)
        self._II = None

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def p(self) -> complex:
        return self.params.p

    @property
    def q(self) -> complex:
        return self.params.q

    def II(self) -> complex:
        if self._II is None:
            self._II = self.engine.value(self.n)
        return self._II

    def in_annulus(self, x: complex) -> bool:
        r = abs(x)
        return abs(self.p) < r < 1.0

    # -- base cases ---------------------------------------------------------

    def F_batch(self, x, v: ArgumentPoint):
        """F_n(x; v) for an array of x; v plain inside the annulus or hatted."""
        x = np.asarray(x, dtype=complex)
        n = self.n
        if v.hatted:
            return self.Fminus(x, v.value)
        if not self.in_annulus(v.value):
            raise ContourError(f"plain v={v.value} outside |p| < |v| < 1")
        vals = self.engine.value(n, numer=[x.ravel()], denom=[v.value]) if n else np.ones(x.size, complex)
        out = np.reshape(vals, x.shape) * x ** (-n) * v.value ** n
        return complex(out) if out.ndim == 0 else out

    def Fminus(self, x, v):
        """F-_n(x, v) = psi_p(x, v) (xv)^{1-n} II_{n-1}(u, qx, pq/x, qv, pq/v); zero at n = 0.

        The prefactor is psi_p(x, v) = -psi_p(v, x): with this sign the F- lemmas,
        the hatted Pluecker relations and the hatted monodromy action all hold.
        """
        x = np.asarray(x, dtype=complex)
        v = complex(v)
        n = self.n
        if n == 0:
            out = np.zeros(x.shape, complex)
        else:
            if n - 1 == 0:
                integral = np.ones(x.size, complex)
            else:
                integral = self.engine.value(n - 1, numer=[x.ravel(), v])
            out = K.psi(self.p, x, v) * (x * v) ** (1 - n) * np.reshape(integral, x.shape)
        return complex(out) if out.ndim == 0 else out

    def _fplus_integral(self, x: complex, v: complex) -> complex:
        n = self.n
        val = self.engine.value(n + 1, denom=[x, v])
        return (x * v) ** (n + 1) * K.psi(self.p, v, x) * val

    # -- general evaluation on (C* u C*)^2 ----------------------------------

    def jump(self, y: complex, b: ArgumentPoint) -> complex:
        """F+_n(1/y, b) - F+_n(y, b) = y^{-1} theta_q(y^2) F_n(y; b) prod_r Gamma(u_r y^{+-1})."""
        p, q = self.p, self.q
        th = K.theta(q, y * y)
        g = 1.0 + 0j
        for a in self.params.u:
            g *= K.gamma_pm(p, q, a, y)
        return th / y * self.F(y, b) * g

    def Fplus(self, a, b) -> complex:
        a, b = as_point(a), as_point(b)
        if not a.hatted and not self.in_annulus(a.value):
            return self._reduce_first(a.value, b)
        if not b.hatted and not self.in_annulus(b.value):
            return -self.Fplus(b, a)
        n = self.n
        if a.hatted and b.hatted:
            return self.Fminus(a.value, b.value)
        if a.hatted:
            return self.F_batch(a.value, b)
        if b.hatted:
            return -self.F_batch(b.value, a)
        return self._fplus_integral(a.value, b.value)

    def _reduce_first(self, x: complex, b: ArgumentPoint) -> complex:
        r, ap = abs(x), abs(self.p)
        if abs(r - 1.0) <= ANNULUS_GUARD or abs(r - ap) <= ANNULUS_GUARD * ap:
            raise ContourError(f"|x| = {r} lies on a boundary circle of the evaluation annulus")
        if r > 1.0:
            y = 1.0 / x
            return self.Fplus(plain(y), b) + self.jump(y, b)
        y = self.p / x
        return (self.p / (y * y)) ** self.n * self.Fplus(plain(y), b)

    def F(self, x, v) -> complex:
        """F_n(x; v) for any nonzero x and any argument point v."""
        return self.Fplus(hat(x), as_point(v))

    def reflect_Fplus(self, x: complex, v) -> complex:
        """F+_n(1/x, v) for x in the annulus via the jump relation."""
        if not self.in_annulus(x):
            raise ContourError("reflect_Fplus needs |p| < |x| < 1")
        v = as_point(v)
        return self.Fplus(plain(x), v) + self.jump(x, v)

    # -- independent continuation outside the unit circle -------------------

    def _continued(self, d: int, numer: list, denom_in: list, b: complex) -> complex:
        """P_d times the analytic continuation of the integral to a denominator
        parameter b with 1 < |b| < 1/|p|.

        The admissible contour is the unit circle plus a loop around b minus a
        loop around 1/b; by z -> 1/z symmetry and the vanishing of the pair
        kernel on coincident residues this equals I_T + 2d * (loop around b in
        one variable) x (unit circle in the rest).
        """
        p = self.p
        if not 1.0 < abs(b) < 1.0 / abs(p):
            raise DomainError("continuation needs 1 < |b| < 1/|p|")
        if d > 2:
            raise DomainError("continuation implemented for d <= 2")
        eng = self.engine
        gaps = [abs(b) - 1.0, abs(b) * (1.0 - abs(p)), 1.0 / abs(p) - abs(b)]
        gaps += [abs(b - 1.0 / a) for a in self.params.u]  # density poles outside T
        radius = 0.5 * min(gaps)

        def w(z):
            out = density(self.params, z)
            for a in numer:
                out = out * K.theta_pm(p, a, z)
            for c in denom_in + [b]:
                out = out / K.theta_pm(p, c, z)
            return out

        def estimate(N):
            z = circle_nodes(N)
            wt = w(z)
            if d == 1:
                base = wt.mean()
            else:
                base = np.einsum("a,ab,b->", wt, eng.kernel_table(N), wt) / N**2
            # loop around b: z = b + radius*e^{i phi}; dz/(2 pi i z) -> radius*e^{i phi}/z / N
            zl = b + radius * z
            wl = w(zl) * (radius * z) / zl
            if d == 1:
                loop = wl.sum() / N
            else:
                cross = (K.theta(p, zl[:, None] * z[None, :]) * K.theta(p, zl[:, None] / z[None, :])
                         * K.theta(p, z[None, :] / zl[:, None]) * K.theta(p, 1.0 / (zl[:, None] * z[None, :])))
                loop = (wl[:, None] * cross * wt[None, :]).sum() / N**2
            return base + 2 * d * loop

        N = 64
        prev = estimate(N)
        while True:
            N *= 2
            cur = estimate(N)
            if abs(cur - prev) <= self.controls.refine * max(abs(cur), 1e-300) or N >= 4096:
                break
            prev = cur
        return eng.prefactor(d) * cur

    def fplus_continued(self, x: complex, v) -> complex:
        """F+_n(x, v) for 1 < |x| < 1/|p| by contour deformation (no jump formula)."""
        v = as_point(v)
        n, p = self.n, self.p
        if v.hatted:
            # F+_n(x, v^) = -F_n(v; x) = -v^{-n} x^n II_n(.., qv, pq/v, x, p/x)
            if n == 0:
                return -1.0 + 0j
            val = self._continued(n, [v.value], [], x)
            return -(v.value ** (-n)) * x ** n * val
        if not self.in_annulus(v.value):
            raise DomainError("plain v must lie in the annulus")
        val = self._continued(n + 1, [], [v.value], x)
        return (x * v.value) ** (n + 1) * K.psi(p, v.value, x) * val

    # -- identities ---------------------------------------------------------

    def measure(self) -> complex:
        """(p;p)^2 / 2, the constant in front of one-variable Cauchy integrals."""
        return K.euler(self.p) ** 2 / 2

    def _outer(self, integrand) -> tuple[complex, float]:
        """(p;p)^2/2 oint integrand(z) dz/(2 pi i z) with its |.|-scale."""
        N = 64
        prev = None
        while True:
            z = circle_nodes(N)
            vals = integrand(z)
            cur = vals.mean()
            scale = np.abs(vals).mean()
            if prev is not None and abs(cur - prev) <= self.controls.refine * max(abs(cur), scale):
                break
            if N >= 4096:
                break
            prev, N = cur, 2 * N
        m = self.measure()
        return m * cur, abs(m) * scale

    def check_biorthogonality(self, v, H: BC1Theta) -> float:
        """|oint F_n(z;v) H(z) Delta(z) / psi_p(v,z)| / oint |same|."""
        v = as_point(v)
        if self.n < 1:
            raise DomainError("biorthogonality needs n >= 1")
        if v.hatted:
            raise DomainError("biorthogonality is stated for plain v")
        p = self.p

        def integrand(z):
            return self.F_batch(z, v) * H(z) / K.psi(p, v.value, z) * density(self.params, z)

        val, scale = self._outer(integrand)
        return float(abs(val) / scale)

    def check_fminus_orthogonality(self, v, H: BC1Theta) -> float:
        """oint F-_n(z, v) H_{n-2}(z) Delta(z) normalised by its |.|-integral."""
        v = as_point(v)

        def integrand(z):
            return self.Fminus(z, v.value) * H(z) * density(self.params, z)

        val, scale = self._outer(integrand)
        return float(abs(val) / scale)

    def cauchy_sides(self, x: complex, v, G: BC1Theta) -> tuple[complex, complex]:
        """Both sides of the Cauchy-transform theorem:
        (p;p)^2/2 oint F_n(z;v) G(z) Delta(z) / (psi(x,z) psi(v,z))  vs  G(x) F+_n(x,v) / psi(v,x).
        """
        v = as_point(v)
        if v.hatted or not self.in_annulus(x):
            raise DomainError("Cauchy identity needs plain v and x in the annulus")
        p = self.p

        def integrand(z):
            return (self.F_batch(z, v) * G(z) * density(self.params, z)
                    / (K.psi(p, x, z) * K.psi(p, v.value, z)))

        lhs, _ = self._outer(integrand)
        rhs = G(x) * (x * v.value) ** (self.n + 1) * self.engine.value(self.n + 1, denom=[x, v.value])
        return lhs, rhs

    def check_cauchy_identity(self, x: complex, v, G: BC1Theta) -> float:
        lhs, rhs = self.cauchy_sides(x, v, G)
        return relative_residual(lhs - rhs, [lhs, rhs])

    def check_cauchy_vanishing(self, x: complex, v, G: BC1Theta) -> float:
        """For G(x) = 0 the left side must vanish: |lhs| over the |integrand| integral."""
        v = as_point(v)
        p = self.p

        def integrand(z):
            return (self.F_batch(z, v) * G(z) * density(self.params, z)
                    / (K.psi(p, x, z) * K.psi(p, v.value, z)))

        lhs, scale = self._outer(integrand)
        return float(abs(lhs) / scale)

    def check_first_lemma(self, x, v, w) -> float:
        """F_n(x;v)F+_n(x,w) - F_n(x;w)F+_n(x,v) - II_n F+_n(v,w)."""
        terms = [self.F(x, v) * self.Fplus(x, w), -self.F(x, w) * self.Fplus(x, v),
                 -self.II() * self.Fplus(v, w)]
        return relative_residual(sum(terms), terms)

    def check_fminus_kernel(self, x: complex, y: complex, v: complex, G: BC1Theta) -> float:
        """(p;p)^2/2 oint F-_n(z,v) G(z) psi(x,y) Delta / (psi(x,z) psi(y,z)) = G(x)F_n(v;x) - G(y)F_n(v;y)."""
        if not (self.in_annulus(x) and self.in_annulus(y)):
            raise DomainError("x and y must lie in the annulus")
        p = self.p

        def integrand(z):
            return (self.Fminus(z, v) * G(z) * K.psi(p, x, y) * density(self.params, z)
                    / (K.psi(p, x, z) * K.psi(p, y, z)))

        lhs, _ = self._outer(integrand)
        a, b = G(x) * self.F(v, x), G(y) * self.F(v, y)
        return relative_residual(lhs - (a - b), [lhs, a, b])

    def check_second_lemma(self, x, v, w) -> float:
        """F-_n(x,v)F+_n(x,w) + F_n(v;x)F_n(x;w) - II_n F_n(v;w)."""
        terms = [self.Fminus(x, v) * self.Fplus(x, w), self.F(v, x) * self.F(x, w),
                 -self.II() * self.F(v, w)]
        return relative_residual(sum(terms), terms)

    def check_pluecker(self, w, x, y, z) -> float:
        """F+(w,x)F+(y,z) - F+(w,y)F+(x,z) + F+(w,z)F+(x,y) = 0 on (C* u C*)^4."""
        f = self.Fplus
        terms = [f(w, x) * f(y, z), -f(w, y) * f(x, z), f(w, z) * f(x, y)]
        return relative_residual(sum(terms), terms)

    def check_antisymmetry(self, a, b) -> float:
        s, t = self.Fplus(a, b), self.Fplus(b, a)
        return relative_residual(s + t, [s, t])

    def monodromy_factor(self, x: complex) -> complex:
        """x^{-1} theta_q(x^2) prod_r Gamma(u_r x^{+-1})."""
        p, q = self.p, self.q
        g = 1.0 + 0j
        for a in self.params.u:
            g *= K.gamma_pm(p, q, a, x)
        return K.theta(q, x * x) / x * g

    def check_monodromy_action(self, x: complex, v) -> tuple[float, float]:
        """Residuals of the 1/x and px row relations.

        F+_n at 1/x and px is taken from the contour-deformation route, the
        right-hand sides from values inside the annulus.
        """
        if not self.in_annulus(x):
            raise DomainError("x must lie in the annulus")
        v = as_point(v)
        n, p = self.n, self.p
        f0, g0 = self.F(x, v), self.Fplus(x, v)
        J = self.monodromy_factor(x)
        f_inv = self.F(1.0 / x, v)
        g_inv = self.fplus_continued(1.0 / x, v)
        r1 = max(relative_residual(f_inv - f0, [f_inv, f0]),
                 relative_residual(g_inv - (J * f0 + g0), [g_inv, J * f0, g0]))
        s = p * x * x
        f_p = self.F(p * x, v)
        g_p = s ** n * g_inv  # F+(p*x) = F+(p/(1/x)) = (p x^2)^n F+(1/x)
        r2 = max(relative_residual(f_p - s ** (-n) * f0, [f_p, s ** (-n) * f0]),
                 relative_residual(g_p - (s ** n * J * f0 + s ** n * g0), [g_p, s ** n * J * f0, s ** n * g0]))
        return r1, r2


def validate_points(ctx: BiorthContext, points: Sequence[ArgumentPoint]):
    """Plain points for direct quadrature must sit strictly inside the annulus."""
    extra = [pt.value for pt in points if not pt.hatted]
    verdict = check_contour(ctx.params, extra)
    if not verdict:
        raise ContourError(verdict.reason)

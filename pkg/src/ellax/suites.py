"""Named verification suites run by ``ellax verify``.

Every suite turns one or more :class:`~ellax.config.RunConfig` cases into a
flat list of :class:`Record` objects.  A record compares a residual with a
tolerance; negative controls pass when the residual is at least the
tolerance.  Numeric failures inside a check are captured on the record so
the rest of the suite still runs.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernel as K
from .bctheta import BC1Theta, basis, random_bc1
from .biorth import BiorthContext, hat, plain, relative_residual
from .config import ConfigError, RunConfig, case_configs
from .errors import ContourError, DomainError, EllaxError
from .lax import (BContext, LaxContext, apply_isomono_integer, check_B_prime, fay_from_B,
                  isomono_ud_params, isomono_uu_params, mat_residual, sample_points)
from .params import ParameterSet, balancing_residual, check_contour, solve_last
from .quadrature import QuadratureControls
from .selberg import (SelbergEngine, selberg, selberg_closed_form_m0, shifted_tau_params,
                      tau_e7_image, tau_renormalized, transform_9_7)

NEEDS = {"biorth": ("v", "w"), "lax-A": ("v", "w"), "lax-B": ("v", "w", "v_prime", "w_prime"),
         "isomono": ("v", "w", "v_prime", "w_prime")}

SUITE_NAMES = ("kernel", "beta", "selberg", "biorth", "pluecker", "lax-A", "lax-B",
               "isomono", "transform97")


@dataclass
class Record:
    name: str
    residual: float | None
    tolerance: float
    N_used: int = 0
    seconds: float = 0.0
    lower: bool = False
    error: str | None = None

    @property
    def passed(self) -> bool:
        if self.error is not None or self.residual is None or not math.isfinite(self.residual):
            return False
        return self.residual >= self.tolerance if self.lower else self.residual <= self.tolerance

    def to_dict(self, timing: bool = False) -> dict:
        out = {"name": self.name, "residual": self.residual, "tolerance": self.tolerance,
               "comparison": ">=" if self.lower else "<=", "pass": self.passed, "N_used": self.N_used}
        if self.error is not None:
            out["error"] = self.error
        if timing:
            out["seconds"] = round(self.seconds, 6)
        return out


class Recorder:
    """Collects records for one case; names are prefixed with the case label."""

    def __init__(self, prefix: str, overrides: dict | None = None):
        self.prefix = prefix
        self.overrides = overrides or {}
        self.records: list[Record] = []
        self.engines: list[SelbergEngine] = []

    def tolerance(self, name: str, default: float) -> float:
        full = f"{self.prefix}/{name}" if self.prefix else name
        return float(self.overrides.get(full, self.overrides.get(name, default)))

    def add(self, name: str, tol: float, fn: Callable[[], float], lower: bool = False) -> Record:
        full = f"{self.prefix}/{name}" if self.prefix else name
        tol = self.tolerance(name, tol)
        for e in self.engines:
            e.last_N = 0
        t0 = time.perf_counter()
        try:
            residual, error = float(fn()), None
        except (EllaxError, ArithmeticError, np.linalg.LinAlgError) as exc:
            residual, error = None, f"{type(exc).__name__}: {exc}"
        rec = Record(full, residual, tol, max([e.last_N for e in self.engines] or [0]),
                     time.perf_counter() - t0, lower, error)
        self.records.append(rec)
        return rec

    def fail(self, name: str, exc: Exception):
        full = f"{self.prefix}/{name}" if self.prefix else name
        self.records.append(Record(full, None, 0.0, error=f"{type(exc).__name__}: {exc}"))

    def track(self, *ctxs):
        for c in ctxs:
            eng = getattr(c, "engine", c)
            if isinstance(eng, SelbergEngine) and eng not in self.engines:
                self.engines.append(eng)


def _rel(a, b) -> float:
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    scale = np.maximum(np.abs(a), np.abs(b))
    return float(np.max(np.abs(a - b) / np.where(scale == 0, 1.0, scale)))


def _rng_point(rng, lo, hi) -> complex:
    return complex(rng.uniform(lo, hi) * np.exp(2j * np.pi * rng.uniform()))


def _checked_params(cfg: RunConfig) -> ParameterSet:
    params = cfg.params()
    check_contour(params).raise_if_invalid()
    return params


def random_balanced(rng, p, q, m: int, n: int, lo: float, hi: float, tries: int = 200) -> ParameterSet:
    """Balanced set with |u_r| in [lo, hi] for the free parameters and a valid contour."""
    for _ in range(tries):
        head = [_rng_point(rng, lo, hi) for _ in range(2 * m + 5)]
        last = solve_last(p, q, m, n, head)
        if not abs(last) < 0.9:
            continue
        params = ParameterSet(p, q, m, n, head + [last])
        if check_contour(params):
            return params
    raise DomainError("no admissible random parameter set found")


# -- kernel -------------------------------------------------------------------------


def suite_kernel(cfg: RunConfig, rec: Recorder):
    """Functional equations at 10 random nome pairs x 100 random points."""
    rng = np.random.default_rng(cfg.seed)
    samples = []
    for _ in range(10):
        p = _rng_point(rng, 0.02, 0.4)
        q = _rng_point(rng, 0.02, 0.4)
        z = rng.uniform(0.5, 1.5, 100) * np.exp(2j * np.pi * rng.uniform(size=100))
        samples.append((p, q, z))

    def worst(fn):
        return lambda: max(fn(p, q, z) for p, q, z in samples)

    def G(p, q, x):
        return K.gamma(p, q, x)

    tol = 1e-12
    rec.add("gamma_p_shift", tol, worst(lambda p, q, z: _rel(G(p, q, p * z), K.theta(q, z) * G(p, q, z))))
    rec.add("gamma_q_shift", tol, worst(lambda p, q, z: _rel(G(p, q, q * z), K.theta(p, z) * G(p, q, z))))
    rec.add("gamma_reflection", tol, worst(lambda p, q, z: _rel(G(p, q, p * q / z) * G(p, q, z), np.ones_like(z))))
    rec.add("gamma_duplication", tol, worst(lambda p, q, z: _rel(
        G(p, q, p * q * z) * G(p, q, z), -G(p, q, p * z) * G(p, q, q * z) / z)))
    rec.add("theta_inversion", tol, worst(lambda p, q, z: _rel(K.theta(p, z), -z * K.theta(p, 1 / z))))
    rec.add("theta_p_reflection", tol, worst(lambda p, q, z: _rel(K.theta(p, z), K.theta(p, p / z))))
    rec.add("gamma_plus_t_shift", tol, worst(lambda p, q, z: _rel(
        K.gamma_plus(p, q, q, q * z), G(p, q, z) * K.gamma_plus(p, q, q, z))))
    rec.add("gamma_plus_reflection", tol, worst(lambda p, q, z: _rel(
        K.gamma_plus(p, q, q, p * q * q / z), K.gamma_plus(p, q, q, z))))


# -- beta and selberg ---------------------------------------------------------------


def _closed_form_check(params: ParameterSet, controls: QuadratureControls, rec: Recorder, name: str, tol: float):
    eng = SelbergEngine(params, controls)
    rec.track(eng)

    def run():
        got = eng.selberg()
        want = selberg_closed_form_m0(params)
        return abs(got - want) / abs(want)

    rec.add(name, tol, run)


def suite_beta(cfg: RunConfig, rec: Recorder):
    """m = 0, n = 1 quadrature against the closed form: config set plus 20 random sets."""
    rng = np.random.default_rng(cfg.seed)
    if cfg.m == 0 and cfg.n == 1:
        _closed_form_check(_checked_params(cfg), cfg.quadrature, rec, "config_set", 1e-10)
    for k in range(20):
        params = random_balanced(rng, cfg.p, cfg.q, 0, 1, 0.3, 0.6)
        _closed_form_check(params, cfg.quadrature, rec, f"random_set{k:02d}", 1e-10)


def suite_selberg(cfg: RunConfig, rec: Recorder):
    """m = 0, n = 2 at a fixed grid, order reduction and permutation invariance."""
    rng = np.random.default_rng(cfg.seed)
    sets = [_checked_params(cfg)] if cfg.m == 0 and cfg.n == 2 else []
    while len(sets) < 5:
        sets.append(random_balanced(rng, cfg.p, cfg.q, 0, 2, 0.6, 0.72))
    for k, params in enumerate(sets):
        _closed_form_check(params, cfg.quadrature, rec, f"n2_set{k}", 1e-8)

    p, q = cfg.p, cfg.q
    base = random_balanced(rng, p, q, 0, 1, 0.4, 0.6)
    a = _rng_point(rng, 0.5, 0.6)
    lifted = ParameterSet(p, q, 1, 1, base.u + (a, p * q / a))

    def reduction():
        hi, lo = selberg(lifted), selberg(base)
        return abs(hi - lo) / abs(lo)

    rec.add("order_reduction", 1e-10, reduction)
    perm = rng.permutation(6)

    def permutation():
        shuffled = ParameterSet(p, q, 0, 1, tuple(base.u[i] for i in perm))
        x, y = selberg(base), selberg(shuffled)
        return abs(x - y) / abs(x)

    rec.add("permutation_invariance", 1e-12, permutation)


# -- biorthogonal family --------------------------------------------------------------


def _x_points(cfg: RunConfig, rng, count: int) -> list[complex]:
    lo, hi = cfg.extra.get("x_modulus", (0.7, 0.85))
    return [_rng_point(rng, lo, hi) for _ in range(count)]


def _require_vw(cfg: RunConfig, suite: str):
    if cfg.v is None or cfg.w is None:
        raise ContourError(f"suite {suite} needs v and w in the config")


def suite_biorth(cfg: RunConfig, rec: Recorder):
    _require_vw(cfg, "biorth")
    params = _checked_params(cfg)
    ctx = BiorthContext(params, cfg.quadrature)
    rec.track(ctx)
    rng = np.random.default_rng(cfg.seed)
    p, q, n = params.p, params.q, params.n
    v, w = cfg.v, cfg.w
    xs = _x_points(cfg, rng, 3)
    tight = 1e-8

    if n >= 1:
        for k, H in enumerate(basis(p, n - 1, seed=cfg.seed)):
            rec.add(f"biorthogonality(H{k})", tight, lambda H=H: ctx.check_biorthogonality(v, H))
        wrong = random_bc1(p, n, rng)
        rec.add("biorthogonality_negative_control", 1e-3, lambda: ctx.check_biorthogonality(v, wrong), lower=True)
    if n >= 2:
        for k, H in enumerate(basis(p, n - 2, seed=cfg.seed)):
            rec.add(f"fminus_orthogonality(H{k})", tight, lambda H=H: ctx.check_fminus_orthogonality(v, H))

    G = random_bc1(p, n, rng)
    for k, x in enumerate(xs[:2]):
        rec.add(f"cauchy(x{k})", tight, lambda x=x: ctx.check_cauchy_identity(x, v, G))
    if n >= 1:
        G0 = BC1Theta(p, (xs[0],) + random_bc1(p, n - 1, rng).factors)
        rec.add("cauchy_vanishing", tight, lambda: ctx.check_cauchy_vanishing(xs[0], v, G0))
        Gk = random_bc1(p, n, rng)
        rec.add("fminus_kernel", tight, lambda: ctx.check_fminus_kernel(xs[0], xs[1], v.value, Gk))

    x = xs[2]
    for label, vv, ww in (("plain,plain", v, w), ("hatted,plain", hat(v.value), w),
                          ("hatted,hatted", hat(v.value), hat(w.value))):
        rec.add(f"first_lemma({label})", tight, lambda vv=vv, ww=ww: ctx.check_first_lemma(x, vv, ww))
    for label, ww in (("plain", w), ("hatted", hat(w.value))):
        rec.add(f"second_lemma(w {label})", tight, lambda ww=ww: ctx.check_second_lemma(x, v.value, ww))

    for ka in ("plain", "hatted"):
        for kb in ("plain", "hatted"):
            a = hat(xs[0]) if ka == "hatted" else plain(xs[0])
            b = hat(v.value) if kb == "hatted" else v
            rec.add(f"antisymmetry({ka},{kb})", 1e-10, lambda a=a, b=b: ctx.check_antisymmetry(a, b))

    def f_symmetry():
        f0 = ctx.F(x, v)
        return max(_rel(ctx.F(1 / x, v), f0), _rel(ctx.F(p * x, v), (p * x * x) ** (-n) * f0))

    rec.add("F_symmetry", 1e-9, f_symmetry)

    if n <= 1:
        for kind, vv in (("plain", v), ("hatted", hat(v.value))):
            rec.add(f"monodromy({kind})", tight, lambda vv=vv: max(ctx.check_monodromy_action(x, vv)))
        rec.add("reflect_vs_continuation", tight,
                lambda: _rel(ctx.reflect_Fplus(x, v), ctx.fplus_continued(1 / x, v)))
        sq = np.sqrt(complex(q))
        for sign, label in ((1, "+"), (-1, "-")):
            s = sign * sq
            rec.add(f"ramification_fixed_point({label})", tight,
                    lambda s=s: _rel(ctx.fplus_continued(1 / s, v), ctx.Fplus(plain(s), v)))


_KINDS = ("plain", "hatted")


def suite_pluecker(cfg: RunConfig, rec: Recorder, offset: int = 0):
    """10 quadruples per case; the kind pattern runs through all 16 mixtures."""
    params = _checked_params(cfg)
    ctx = BiorthContext(params, cfg.quadrature)
    rec.track(ctx)
    rng = np.random.default_rng(cfg.seed + offset)
    for i in range(10):
        mix = (offset * 10 + i) % 16
        pts = []
        for slot in range(4):
            val = _rng_point(rng, 0.4, 0.85)
            pts.append(hat(val) if (mix >> slot) & 1 else plain(val))
        label = "".join("h" if pt.hatted else "p" for pt in pts)
        rec.add(f"pluecker(q{i}:{label})", 1e-8, lambda pts=pts: ctx.check_pluecker(*pts))
    a, b = plain(_rng_point(rng, 0.4, 0.85)), plain(_rng_point(rng, 0.4, 0.85))
    rec.add("pluecker_repeated_argument", 1e-10, lambda: abs(ctx.Fplus(a, a)) / max(abs(ctx.Fplus(a, b)), 1e-300))


# -- lax system -------------------------------------------------------------------------


def _lax(cfg: RunConfig, rec: Recorder, suite: str) -> LaxContext:
    _require_vw(cfg, suite)
    L = LaxContext.build(_checked_params(cfg), cfg.v, cfg.w, cfg.quadrature)
    rec.track(L.bctx)
    return L


def _max_over(zs, fn):
    return lambda: max(fn(z) for z in zs)


def suite_lax_A(cfg: RunConfig, rec: Recorder):
    L = _lax(cfg, rec, "lax-A")
    zs = sample_points(cfg.seed)
    rec.add("M_det", 1e-8, _max_over(zs, L.check_det_M))
    rec.add("M_reflection", 1e-8, _max_over(zs, L.check_M_reflection))
    rec.add("M_p_shift", 1e-8, _max_over(zs, lambda z: L.check_p_shift_of_M(z)[0]))
    rec.add("M_p_shift_det", 1e-8, _max_over(zs, lambda z: L.check_p_shift_of_M(z)[1]))

    cache = {}

    def atilde(key):
        def run():
            if not cache:
                for z in zs:
                    for k, val in L.check_Atilde(z).items():
                        cache[k] = max(cache.get(k, 0.0), val)
            return cache[key]
        return run

    for key in ("factored_vs_direct", "det", "p_law", "symmetry", "inverse"):
        rec.add(f"A_{key}", 1e-8, atilde(key))

    try:
        special = L.special_values_A()
    except (EllaxError, ArithmeticError) as exc:
        rec.fail("A_special_values", exc)
        special = []
    for sv in special:
        rec.add(sv["name"], 1e-7, lambda sv=sv: sv["residual"])
        if "rank" in sv:
            rec.add(f"{sv['name']}_rank", 1e-7, lambda sv=sv: sv["rank"])

    u = L.params.u
    for label, z0 in (("1/u0", 1 / u[0]), ("p*u0", L.p * u[0]), (f"1/u{len(u) - 1}", 1 / u[-1]),
                      (f"p*u{len(u) - 1}", L.p * u[-1])):
        rec.add(f"A_holomorphy_probe({label})", 10.0, lambda z0=z0: L.holomorphy_probe(z0))

    if L.n == 0:
        def triangular():
            Lh = LaxContext(L.bctx, L.v, hat(L.w.value))
            return max(abs(Lh.M(z)[1, 0]) / np.abs(Lh.M(z)).max() for z in zs)

        rec.add("M_triangular_hatted_w", 1e-12, triangular)


def _bcontext(cfg: RunConfig, L: LaxContext, rec: Recorder, suite: str) -> BContext:
    if cfg.v_prime is None or cfg.w_prime is None:
        raise ContourError(f"suite {suite} needs v_prime and w_prime in the config")
    bc = BContext(L, cfg.v_prime, cfg.w_prime)
    rec.track(bc.gctx)
    return bc


def suite_lax_B(cfg: RunConfig, rec: Recorder):
    L = _lax(cfg, rec, "lax-B")
    bc = _bcontext(cfg, L, rec, "lax-B")
    zs = sample_points(cfg.seed)
    cache = {}

    def btilde(key):
        def run():
            if not cache:
                for z in zs:
                    for k, val in bc.check_Btilde(z).items():
                        cache[k] = max(cache.get(k, 0.0), val)
            return cache[key]
        return run

    for key in ("factored_vs_direct", "det", "p_law", "A_relation", "B_inverse"):
        rec.add(f"B_{key}", 1e-7, btilde(key))
    try:
        special = bc.special_values_B()
    except (EllaxError, ArithmeticError) as exc:
        rec.fail("B_special_values", exc)
        special = []
    for sv in special:
        rec.add(sv["name"], 1e-7, lambda sv=sv: sv["residual"])
        rec.add(f"{sv['name']}_rank", 1e-7, lambda sv=sv: sv["rank"])
    tol = 1e-8 if L.n == 0 else 1e-7
    rec.add("fay_from_B", tol, lambda: fay_from_B(L)["residual"])
    x = 0.45 * np.exp(0.7j)
    rec.add("B_prime_prefactor", 1e-7, lambda: check_B_prime(bc, x, zs[0]))


def _balance(s: ParameterSet) -> float:
    return balancing_residual(s.p, s.q, s.m, s.n, s.u)


def suite_isomono(cfg: RunConfig, rec: Recorder):
    L = _lax(cfg, rec, "isomono")
    if cfg.v_prime is None or cfg.w_prime is None:
        raise ContourError("suite isomono needs v_prime and w_prime in the config")
    zs = sample_points(cfg.seed)
    v2, w2 = cfg.v_prime, cfg.w_prime
    rec.add("isomono_vw", 1e-7, lambda: L.apply_isomono_vw(v2, w2, zs)[1])
    rec.add("isomono_vw_identity", 1e-12,
            lambda: mat_residual(L.apply_isomono_vw(L.v, L.w, zs[:1])[0].array, np.eye(2)))
    rec.add("isomono_vw_swap", 1e-7, lambda: L.apply_isomono_vw(L.w, L.v, zs)[1])
    rec.add("A_basis_change_conjugation", 1e-8, lambda: L.check_Atilde_basis_change(v2, w2, zs))

    params = L.params
    rec.add("isomono_ud_balancing", 1e-12, lambda: _balance(isomono_ud_params(params)))
    rec.add("isomono_ud", 1e-7, lambda: apply_isomono_integer(params, "ud", zs, cfg.quadrature))
    if params.n >= 1:
        rec.add("isomono_uu_balancing", 1e-12, lambda: _balance(isomono_uu_params(params)))
        rec.add("isomono_uu", 1e-7, lambda: apply_isomono_integer(params, "uu", zs, cfg.quadrature))

    x = 0.45 * np.exp(0.7j)
    cache = {}

    def apparent(key):
        def run():
            if not cache:
                for z in zs:
                    for k, val in L.check_apparent(x, z).items():
                        cache[k] = max(cache.get(k, 0.0), val)
            return cache[key]
        return run

    rec.add("apparent_elliptic", 1e-7, apparent("elliptic"))
    rec.add("apparent_wrap", 1e-7, apparent("wrap"))


def suite_transform97(cfg: RunConfig, rec: Recorder):
    params = _checked_params(cfg)
    controls = cfg.quadrature

    def law():
        lhs, rhs = transform_9_7(params, controls)
        return abs(lhs - rhs) / abs(lhs)

    rec.add("transform_law", 1e-6, law)
    sq = np.sqrt(complex(params.q))
    raw = [a / sq for a in params.u]

    def tau():
        t1 = tau_renormalized(params.p, params.q, params.n, raw, controls)
        t2 = tau_renormalized(params.p, params.q, params.n, tau_e7_image(params.p, params.q, params.n, raw), controls)
        return abs(t1 - t2) / abs(t1)

    rec.add("tau_e7_invariance", 1e-6, tau)
    rec.add("tau_shift_consistency", 1e-12,
            lambda: max(abs(a - b) for a, b in zip(shifted_tau_params(params.p, params.q, params.n, raw).u, params.u)))


SUITES: dict[str, Callable] = {
    "kernel": suite_kernel,
    "beta": suite_beta,
    "selberg": suite_selberg,
    "biorth": suite_biorth,
    "pluecker": suite_pluecker,
    "lax-A": suite_lax_A,
    "lax-B": suite_lax_B,
    "isomono": suite_isomono,
    "transform97": suite_transform97,
}


def max_threads() -> int:
    try:
        return max(1, int(os.environ.get("ELLAX_THREADS", "1")))
    except ValueError:
        return 1


def _run_case(suite: str, cfg: RunConfig, index: int, multi: bool) -> list[Record]:
    rec = Recorder(cfg.label if multi else "", cfg.tolerances)
    fn = SUITES[suite]
    try:
        if suite == "pluecker":
            fn(cfg, rec, offset=index)
        else:
            fn(cfg, rec)
    except (EllaxError, ArithmeticError) as exc:
        rec.fail("setup", exc)
    return rec.records


def run_suite(suite: str, raw: dict, seed: int | None = None, threads: int | None = None):
    """(case configs, records sorted by name) for one suite."""
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}")
    cases = case_configs(raw, suite, seed)
    for cfg in cases:
        cfg.params()  # balancing and shape problems surface before any work
        missing = [key for key in NEEDS.get(suite, ()) if getattr(cfg, key) is None]
        if missing:
            raise ConfigError(f"suite {suite} needs {', '.join(missing)} in the config")
    multi = len(cases) > 1
    threads = threads or max_threads()
    if threads > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(cases))) as pool:
            chunks = list(pool.map(lambda a: _run_case(suite, a[1], a[0], multi), enumerate(cases)))
    else:
        chunks = [_run_case(suite, cfg, k, multi) for k, cfg in enumerate(cases)]
    records = sorted((r for chunk in chunks for r in chunk), key=lambda r: r.name)
    return cases, records

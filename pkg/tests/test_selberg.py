import numpy as np
import pytest

from ellax import kernel as K
from ellax.errors import ContourError, DomainError
from ellax.params import ParameterSet
from ellax.quadrature import QuadratureControls
from ellax.selberg import (SelbergEngine, density, density_ratio_form, e7_reflect, elliptic_beta_rhs, selberg,
                           selberg_closed_form_m0, tau_e7_image, tau_renormalized, transform_9_7)

import oracles
from conftest import balanced, e

T97 = [0.2999730620307219 - 0.295413504238684j, -0.3530103193299969 + 0.07257255526479574j,
       -0.3272004057077096 - 0.10096432464046878j, -0.1288148166381218 + 0.26435782587940854j,
       0.0025201858867456507 - 0.3027283305615979j, 0.2566223607737922 + 0.04097045162071982j,
       -0.1455058838310349 + 0.15074577525279767j]
M0N2 = [e(.65, .2), e(.7, 2.1), e(.6, -1.3), e(.72, -2.6), e(.62, 1.1)]


def rel(a, b):
    return abs(a - b) / abs(b)


def test_density_forms_agree(m0n1):
    for z in (0.8 + 0.3j, np.exp(0.7j), 1.3j):
        assert rel(density(m0n1, z), density_ratio_form(m0n1, z)) < 1e-13


def test_density_vanishes_at_fixed_points(m0n1):
    assert density(m0n1, 1.0) == 0
    assert density(m0n1, -1.0) == 0


def test_elliptic_beta_closed_form(m0n1):
    got = selberg(m0n1)
    assert rel(got, selberg_closed_form_m0(m0n1)) < 1e-12
    assert rel(got, K.gamma(m0n1.p, m0n1.q, m0n1.q) * elliptic_beta_rhs(m0n1)) < 1e-12


# tanh-sinh quadrature of the defining integrand (direct Gamma products, 20 digits),
# see oracles.selberg1; frozen because the mpmath run takes about a minute
II1_ORACLE = 0.9340102624462443 + 0.6028690863298969j


def test_engine_against_mpmath_quadrature(m0n1):
    assert rel(selberg(m0n1), II1_ORACLE) < 1e-12


def test_m0_n2_closed_form_at_fixed_grid():
    params = balanced(M0N2, 0, 2, p=0.02, q=0.3)
    got = selberg(params, QuadratureControls(N=256, max_N=256))
    assert rel(got, selberg_closed_form_m0(params)) < 1e-8


def test_m0_n3_closed_form():
    head = [e(.75, .2), e(.72, 2.1), e(.75, -1.3), e(.74, -2.6), e(.73, 1.1)]
    params = balanced(head, 0, 3, p=0.01, q=0.5)
    assert rel(selberg(params), selberg_closed_form_m0(params)) < 1e-10


def test_order_reduction_by_cancelling_pair(m0n1):
    a = e(0.55, 0.3)
    lifted = ParameterSet(m0n1.p, m0n1.q, 1, 1, m0n1.u + (a, m0n1.p * m0n1.q / a))
    assert rel(selberg(lifted), selberg(m0n1)) < 1e-12


def test_permutation_invariance(m0n1):
    shuffled = m0n1.with_u(m0n1.u[::-1])
    assert rel(selberg(shuffled), selberg(m0n1)) < 1e-13


def test_engine_batches_numerator_parameters(m0n1):
    eng = SelbergEngine(m0n1)
    xs = np.array([0.5, 0.6j, -0.7])
    batch = eng.value(1, numer=[xs])
    single = [eng.value(1, numer=[np.array([x])])[0] for x in xs]
    assert np.allclose(batch, single, rtol=1e-14, atol=0)
    assert eng.max_error < 1e-12


def test_e7_reflection_is_balanced_involution():
    params = balanced(T97, 1, 1)
    image = e7_reflect(params)
    assert np.allclose(e7_reflect(image).u, params.u, rtol=1e-14, atol=0)


def test_transformation_law():
    lhs, rhs = transform_9_7(balanced(T97, 1, 1))
    assert rel(lhs, rhs) < 1e-10


def test_tau_invariance_under_reflection():
    params = balanced(T97, 1, 1)
    sq = np.sqrt(params.q)
    raw = [a / sq for a in params.u]
    t1 = tau_renormalized(params.p, params.q, 1, raw)
    t2 = tau_renormalized(params.p, params.q, 1, tau_e7_image(params.p, params.q, 1, raw))
    assert rel(t2, t1) < 1e-10


def test_errors(m0n1):
    with pytest.raises(DomainError):
        selberg_closed_form_m0(balanced(T97, 1, 1))
    with pytest.raises(DomainError):
        e7_reflect(m0n1)
    with pytest.raises(DomainError):
        SelbergEngine(m0n1).integrate(4)
    with pytest.raises(DomainError):
        SelbergEngine(m0n1).integrate(1, denom=[1.5])
    u = list(m0n1.u)
    u[0], u[1] = u[0] * 3, u[1] / 3  # |u0| = 1.2, still balanced
    with pytest.raises(ContourError):
        SelbergEngine(m0n1.with_u(u))

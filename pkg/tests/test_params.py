import numpy as np
import pytest

from ellax.errors import BalancingError, ContourError, DomainError
from ellax.params import ParameterSet, balancing_residual, check_contour, solve_last

from conftest import HEAD_M0, P, Q


def test_solve_last_m0_is_pq_over_product():
    u5 = solve_last(P, Q, 0, 1, HEAD_M0)
    assert abs(u5 - P * Q / np.prod(HEAD_M0)) < 1e-15
    assert abs(abs(u5) - 0.4233) < 1e-3


def test_balancing_enforced():
    u = list(HEAD_M0) + [0.2]
    with pytest.raises(BalancingError, match="balancing violated"):
        ParameterSet(P, Q, 0, 1, u)


def test_wrong_length_and_zero():
    with pytest.raises(DomainError):
        ParameterSet(P, Q, 1, 1, [0.1] * 6)
    with pytest.raises(DomainError):
        solve_last(P, Q, 0, 1, [0.1] * 4)


def test_contour_verdicts(m0n1):
    assert check_contour(m0n1)
    assert not check_contour(m0n1, extra=[1.2])
    bad = m0n1.with_u([1.1, 0.5, 0.45, -0.35, m0n1.u[4], P * Q / (1.1 * 0.5 * 0.45 * -0.35 * m0n1.u[4])])
    verdict = check_contour(bad)
    assert not verdict and "u[0]" in verdict.reason
    with pytest.raises(ContourError):
        verdict.raise_if_invalid()


def test_collision_detected():
    a = 0.5
    head = [a, 1 / (Q * a), 0.3, 0.2, 0.25]  # q u0 u1 = 1
    u = head + [solve_last(P, Q, 0, 1, head)]
    verdict = check_contour(ParameterSet(P, Q, 0, 1, u))
    assert not verdict


def test_balancing_residual_zero_for_solved(m0n1):
    assert balancing_residual(m0n1.p, m0n1.q, 0, 1, m0n1.u) < 1e-15

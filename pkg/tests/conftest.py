import numpy as np
import pytest

from ellax.biorth import BiorthContext, hat, plain
from ellax.lax import LaxContext
from ellax.params import ParameterSet, solve_last


def e(r, t):
    return complex(r * np.exp(1j * t))


P, Q = 0.05, 0.08
HEAD_M0 = [0.40, 0.50, 0.45, -0.35, e(0.30, 0.7)]
HEAD_M1 = [0.3, 0.25j, e(0.28, 1), e(0.3, -0.5), 0.22, e(0.3, 2), e(0.25, -2)]
LAX_M1 = [e(.35, .3), e(.33, 1.9), e(.36, -2.2), e(.34, -.7), e(.18, 1.2), e(.17, -2.6), e(.19, 2.8)]
ISO_M1 = [e(.35, .3), e(.06, 1.9), e(.4, -2.2), e(.45, -.7), e(.3, 1.2), e(.35, -2.6), e(.3, 2.8)]
V, W = plain(e(0.6, 0.4)), plain(e(0.7, -1.1))
V2, W2 = plain(e(0.5, 1.0)), hat(0.6)


def balanced(head, m, n, p=P, q=Q):
    return ParameterSet(p, q, m, n, list(head) + [solve_last(p, q, m, n, head)])


@pytest.fixture(scope="session")
def m0n1():
    return balanced(HEAD_M0, 0, 1)


@pytest.fixture(scope="session", params=[0, 1], ids=["n0", "n1"])
def head_ctx(request):
    return BiorthContext(balanced(HEAD_M1, 1, request.param))


@pytest.fixture(scope="session", params=[0, 1], ids=["n0", "n1"])
def lax(request):
    return LaxContext.build(balanced(LAX_M1, 1, request.param), V, W)


@pytest.fixture(scope="session")
def lax_n1():
    return LaxContext.build(balanced(LAX_M1, 1, 1), V, W)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

"""Shared fixtures: the three demand families in canonical parameterizations."""

import pytest

from polyequil import DemandSpec, solve_ree

# Linear with slope -0.5 and shifter 1: fixed point 4/3, pass-through 2/3.
LIN_B = 1.0
# Exponential with unit scale: the b=0 fixed point is the Omega constant
# W(1) = 0.5671432904097838..., self-price A0 = exp(-A0).
OMEGA = 0.5671432904097838


@pytest.fixture(scope="session")
def lin():
    return DemandSpec.linear(1.0, 0.5, b_ref=LIN_B)


@pytest.fixture(scope="session")
def lin_a0(lin):
    return solve_ree(lin, LIN_B).A0


@pytest.fixture(scope="session")
def exp1():
    return DemandSpec.exp_convex(1.0, 1.0)


@pytest.fixture(scope="session")
def exp1_a0(exp1):
    return solve_ree(exp1, 0.0).A0


@pytest.fixture(scope="session")
def quad():
    return DemandSpec.quad_concave(2.0, 0.5, 0.1)


@pytest.fixture(scope="session")
def quad_a0(quad):
    return solve_ree(quad, 0.0).A0

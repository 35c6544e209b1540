"""Fixed-point solver and the frictionless pass-through."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyequil import DemandSpec, ree_multiplier, solve_ree
from polyequil.errors import ArgError, BracketError
from polyequil.oracle import fd_derivative

from conftest import LIN_B, OMEGA


def test_linear_fixed_point_is_exact(lin):
    pt = solve_ree(lin, LIN_B)
    # (b + c)/(1 + m) = 2/1.5
    assert pt.A0 == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert pt.P0 == pytest.approx(pt.A0, abs=1e-12)
    assert pt.residual <= 1e-12


def test_exp_fixed_point_is_omega(exp1):
    # A = exp(-A) has the Omega constant as its root
    pt = solve_ree(exp1, 0.0)
    assert pt.A0 == pytest.approx(OMEGA, abs=1e-12)
    assert math.exp(-pt.A0) == pytest.approx(pt.A0, abs=1e-12)


def test_residual_definition(quad):
    pt = solve_ree(quad, 0.0)
    assert pt.residual == abs(pt.A0 - float(quad.price(pt.A0, 0.0)))
    assert pt.residual <= 1e-12


def test_bracket_error_when_intercept_nonpositive(lin):
    with pytest.raises(BracketError):
        solve_ree(lin, -2.0)   # price(0, b) = b + c = -1 < 0


def test_bracket_error_when_domain_too_small():
    spec = DemandSpec.linear(1.0, 0.5, a_max=0.5)
    with pytest.raises(BracketError):
        solve_ree(spec, 1.0)   # fixed point 4/3 lies beyond a_max


def test_tol_must_be_positive(lin):
    with pytest.raises(ArgError):
        solve_ree(lin, LIN_B, tol=0.0)


def test_linear_multiplier_closed_form(lin):
    # phi_b / (1 - phi_A) = 1 / 1.5
    assert ree_multiplier(lin, LIN_B) == pytest.approx(2.0 / 3.0,
                                                       abs=1e-12)


def test_exp_multiplier_value(exp1, exp1_a0):
    # slope at the fixed point is -A0, so the pass-through is 1/(1+A0)
    want = 1.0 / (1.0 + exp1_a0)
    assert ree_multiplier(exp1, 0.0) == pytest.approx(want, abs=1e-12)
    assert ree_multiplier(exp1, 0.0) == pytest.approx(0.638104, abs=1e-3)


def test_multiplier_matches_fd_of_solver(lin, exp1, quad):
    for spec, b in ((lin, LIN_B), (exp1, 0.0), (quad, 0.0)):
        got = ree_multiplier(spec, b)
        want = fd_derivative(lambda x: solve_ree(spec, x).A0, b, h=1e-5)
        assert got == pytest.approx(want, rel=1e-3)


def test_multiplier_in_unit_interval(lin, exp1, quad):
    for spec, b in ((lin, LIN_B), (exp1, 0.0), (quad, 0.0)):
        assert 0.0 < ree_multiplier(spec, b) < 1.0


@given(c=st.floats(min_value=0.2, max_value=3.0),
       m=st.floats(min_value=0.1, max_value=2.0),
       b=st.floats(min_value=0.0, max_value=2.0))
@settings(max_examples=80)
def test_linear_fixed_point_closed_form(c, m, b):
    spec = DemandSpec.linear(c, m, b_ref=b)
    pt = solve_ree(spec, b)
    assert pt.A0 == pytest.approx((b + c) / (1.0 + m), rel=1e-12)


@given(c=st.floats(min_value=0.2, max_value=3.0),
       alpha=st.floats(min_value=0.2, max_value=2.0),
       b=st.floats(min_value=0.0, max_value=1.5))
@settings(max_examples=60)
def test_fixed_point_is_unique_on_domain(c, alpha, b):
    """g = A - price(A,b) crosses zero exactly once on [0, a_max]."""
    from polyequil.oracle import find_roots
    spec = DemandSpec.exp_convex(c, alpha, b_ref=b)
    pt = solve_ree(spec, b)
    rs = find_roots(lambda a: a - float(spec.price(a, b, check=False)),
                    0.0, spec.a_max, grid_n=2001)
    assert len(rs) == 1
    assert rs.roots[0] == pytest.approx(pt.A0, abs=1e-9)

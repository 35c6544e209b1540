"""Demand curve construction, evaluation, and the self-audit."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyequil import DemandSpec, Family
from polyequil.errors import DomainError, ShapeError
from polyequil.oracle import fd_derivative

pos = st.floats(min_value=0.05, max_value=5.0, allow_nan=False)


def test_factories_set_family():
    assert DemandSpec.linear(1.0, 0.5).family is Family.LINEAR
    assert DemandSpec.exp_convex(1.0, 2.0).family is Family.EXP_CONVEX
    assert DemandSpec.quad_concave(1.0, 0.5, 0.1).family is Family.QUAD_CONCAVE


def test_shape_rejections():
    with pytest.raises(ShapeError):
        DemandSpec.linear(0.0, 0.5)          # zero intercept
    with pytest.raises(ShapeError):
        DemandSpec.linear(1.0, -0.1)         # upward-sloping
    with pytest.raises(ShapeError):
        DemandSpec.linear(1.0, 0.0)          # flat is not downward-sloping
    with pytest.raises(ShapeError):
        DemandSpec.exp_convex(1.0, 0.0)      # no decay
    with pytest.raises(ShapeError):
        DemandSpec.exp_convex(-1.0, 1.0)
    with pytest.raises(ShapeError):
        DemandSpec.quad_concave(1.0, 0.5, 0.0)
    with pytest.raises(ShapeError):
        DemandSpec.quad_concave(1.0, 0.0, 0.1)


def test_point_values_linear(lin):
    # price = b + c - m*A
    assert lin.price(1.0, 1.0) == pytest.approx(1.5, abs=1e-15)
    assert lin.dprice_dA(1.0) == -0.5
    assert lin.d2price_dA2(1.0) == 0.0
    assert lin.dprice_db(1.0) == 1.0


def test_point_values_exp(exp1):
    assert exp1.price(0.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert exp1.price(1.0, 0.0) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert exp1.dprice_dA(1.0) == pytest.approx(-math.exp(-1.0), abs=1e-15)
    assert exp1.d2price_dA2(1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_point_values_quad(quad):
    # b + c - m*A - kappa*A^2 at A=1, b=0: 2 - 0.5 - 0.1 = 1.4
    assert quad.price(1.0, 0.0) == pytest.approx(1.4, abs=1e-15)
    assert quad.dprice_dA(1.0) == pytest.approx(-0.7, abs=1e-15)
    assert quad.d2price_dA2(1.0) == -0.2


def test_vectorized_evaluation(lin):
    a = np.linspace(0.0, 2.0, 7)
    p = lin.price(a, 1.0)
    assert p.shape == a.shape
    assert np.allclose(p, 2.0 - 0.5 * a)
    assert np.all(lin.dprice_db(a) == 1.0)


def test_domain_enforcement(lin):
    hi = lin.a_max
    with pytest.raises(DomainError):
        lin.price(hi * 1.5, 1.0)
    with pytest.raises(DomainError):
        lin.price(-0.5, 1.0)
    # check=False extrapolates instead of raising
    assert np.isfinite(lin.price(hi * 1.5, 1.0, check=False))


def test_default_domain_scales_with_fixed_point(lin, lin_a0):
    # default a_max is four times a coarse fixed-point estimate
    assert lin.a_max == pytest.approx(4.0 * lin_a0, rel=1e-2)


def test_quad_domain_stays_positive():
    spec = DemandSpec.quad_concave(1.0, 1.0, 1.0)
    grid = np.linspace(0.0, spec.a_max, 501)
    assert np.all(spec.price(grid, 0.0) > 0.0)
    # the positivity root of 1 - A - A^2 is (sqrt(5)-1)/2
    assert spec.a_max <= (math.sqrt(5.0) - 1.0) / 2.0


def test_explicit_a_max_is_respected():
    spec = DemandSpec.linear(1.0, 0.5, a_max=2.0)
    assert spec.a_max == 2.0
    with pytest.raises(DomainError):
        spec.price(2.5, 0.0)


def test_quad_a_max_beyond_positivity_is_only_a_report():
    # an oversized domain constructs fine; the audit flags the grid
    # points where the parabola has crossed zero
    spec = DemandSpec.quad_concave(1.0, 1.0, 1.0, a_max=5.0)
    report = spec.validate(b=0.0)
    assert not report.ok
    assert any("positive" in issue for issue in report.issues)
    # positivity fails from the root of 1 - A - A^2 upward
    a_pos = (math.sqrt(5.0) - 1.0) / 2.0
    grid = np.linspace(0.0, 5.0, 201)
    assert np.all(spec.price(grid[grid < a_pos], 0.0) > 0.0)


@given(c=pos, m=st.floats(min_value=0.05, max_value=2.0), a=pos, b=pos)
@settings(max_examples=80)
def test_linear_slope_matches_fd(c, m, a, b):
    spec = DemandSpec.linear(c, m, a_max=10.0, b_ref=b)
    if a >= spec.a_max:
        a = spec.a_max / 2.0
    got = float(spec.dprice_dA(a))
    want = fd_derivative(lambda x: float(spec.price(x, b, check=False)), a)
    assert got == pytest.approx(want, abs=1e-6)


@given(c=pos, alpha=st.floats(min_value=0.1, max_value=3.0), a=pos)
@settings(max_examples=80)
def test_exp_curvature_matches_fd(c, alpha, a):
    spec = DemandSpec.exp_convex(c, alpha, a_max=10.0)
    got = float(spec.d2price_dA2(a))
    want = fd_derivative(
        lambda x: float(spec.dprice_dA(x, check=False)), a)
    assert got == pytest.approx(want, rel=1e-5, abs=1e-6)


@given(c=pos, alpha=st.floats(min_value=0.1, max_value=3.0),
       b=st.floats(min_value=-0.5, max_value=2.0))
@settings(max_examples=60)
def test_shifter_moves_price_one_for_one(c, alpha, b):
    spec = DemandSpec.exp_convex(c, alpha)
    a = spec.a_max / 3.0
    assert float(spec.price(a, b) - spec.price(a, 0.0)) == pytest.approx(
        b, abs=1e-12)


def test_validate_passes_shipped_families(lin, exp1, quad):
    for spec, b in ((lin, 1.0), (exp1, 0.0), (quad, 0.0)):
        report = spec.validate(b=b)
        assert report.ok, report.issues
        assert report.fd_slope_err < 1e-6
        assert report.fd_curvature_err < 1e-6


def test_validate_passes_linear_across_its_zero_crossing():
    # the linear curve goes nonpositive inside the default domain; that
    # is a domain-sizing fact, not a shape defect, so the audit passes
    spec = DemandSpec.linear(1.0, 0.5, b_ref=1.0)
    assert spec.price(spec.a_max, 1.0) < 0.0
    assert spec.validate(b=1.0).ok


def test_validate_flags_negative_intercept():
    spec = DemandSpec.exp_convex(1.0, 1.0)
    report = spec.validate(b=-2.0)
    assert not report.ok
    assert any("zero supply" in issue for issue in report.issues)


def test_params_roundtrip(lin, exp1, quad):
    assert lin.params() == {"c": 1.0, "m": 0.5}
    assert exp1.params() == {"c": 1.0, "alpha": 1.0}
    assert quad.params() == {"c": 2.0, "m": 0.5, "kappa": 0.1}

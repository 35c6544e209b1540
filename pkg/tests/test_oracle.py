"""Root scanner, finite differences, and the residual registry."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyequil import oracle
from polyequil.errors import NonFiniteError, UnknownEquationError
from polyequil.oracle import fd_derivative, find_roots, residual


def test_finds_quadratic_roots():
    rs = find_roots(lambda x: (x - 1.0) * (x + 2.0), -5.0, 5.0)
    assert len(rs) == 2
    assert rs.roots[0] == pytest.approx(-2.0, abs=1e-10)
    assert rs.roots[1] == pytest.approx(1.0, abs=1e-10)


def test_roots_are_sorted_and_deduped():
    # triple contact at 0 plus simple roots either side
    rs = find_roots(lambda x: x ** 3 - x, -2.0, 2.0)
    assert list(rs.roots) == sorted(rs.roots)
    assert len(rs) == 3


def test_no_roots_is_empty():
    rs = find_roots(lambda x: x * x + 1.0, -3.0, 3.0)
    assert len(rs) == 0
    assert rs.bracket_count == 0


def test_root_at_grid_point():
    rs = find_roots(lambda x: x, -1.0, 1.0, grid_n=5)
    assert len(rs) == 1
    assert rs.roots[0] == pytest.approx(0.0, abs=1e-12)


def test_interval_endpoints_root():
    rs = find_roots(lambda x: x - 2.0, 0.0, 2.0)
    assert len(rs) == 1
    assert rs.roots[0] == pytest.approx(2.0, abs=1e-10)


def test_nonfinite_raises():
    with pytest.raises(NonFiniteError):
        find_roots(lambda x: 1.0 / x, -1.0, 1.0, grid_n=11)
    with pytest.raises(NonFiniteError):
        find_roots(lambda x: float("nan"), 0.0, 1.0)


def test_bad_interval_rejected():
    with pytest.raises(Exception):
        find_roots(lambda x: x, 1.0, -1.0)


def test_close_roots_merge():
    # two roots 1e-8 apart get merged into one cluster at merge_tol=1e-6
    f = lambda x: (x - 0.5) * (x - 0.5 - 1e-8)
    rs = find_roots(f, 0.0, 1.0, merge_tol=1e-6)
    assert len(rs) == 1
    assert rs.roots[0] == pytest.approx(0.5, abs=1e-6)


def test_randomized_polynomials_against_numpy():
    """Random cubics/quartics: every real root in the window is found."""
    rng = random.Random(20240817)
    for trial in range(60):
        deg = rng.choice([2, 3, 4])
        coeffs = [rng.uniform(-3.0, 3.0) for _ in range(deg)] + [
            rng.uniform(0.5, 3.0)]
        poly = np.polynomial.Polynomial(coeffs)
        true_roots = [r.real for r in poly.roots()
                      if abs(r.imag) < 1e-12 and -8.0 < r.real < 8.0]
        # skip draws with nearly-multiple roots: no sign change to scan
        d = poly.deriv()
        if any(abs(d(r)) < 1e-3 for r in true_roots):
            continue
        rs = find_roots(lambda x: float(poly(x)), -8.0, 8.0, grid_n=4001)
        assert len(rs) == len(true_roots), (coeffs, rs.roots, true_roots)
        for got, want in zip(rs.roots, sorted(true_roots)):
            assert got == pytest.approx(want, abs=5e-11)


@given(st.floats(min_value=-3.0, max_value=3.0),
       st.floats(min_value=0.1, max_value=2.0))
@settings(max_examples=60)
def test_fd_derivative_on_exponentials(x, scale):
    f = lambda t: math.exp(scale * t)
    got = fd_derivative(f, x)
    assert got == pytest.approx(scale * math.exp(scale * x), rel=1e-7)


def test_fd_derivative_square_at_one():
    assert fd_derivative(lambda x: x * x, 1.0) == pytest.approx(2.0,
                                                                abs=1e-8)


def test_residual_unknown_id():
    with pytest.raises(UnknownEquationError):
        residual("not_an_equation", 0.0, {})


def test_equation_ids_are_stable():
    assert set(oracle.equation_ids()) == {
        "first_order", "shift_up", "shift_down", "second_order",
        "worstcase_r1", "worstcase_r2", "learning_step", "agent_forecast",
        "mixture"}


def test_first_order_residual_at_known_roots():
    ctx = {"tau": 2.0, "slope": -0.5}
    assert residual("first_order", 0.0, ctx) == 0.0
    assert residual("first_order", -0.75, ctx) == pytest.approx(0.0,
                                                                abs=1e-15)
    assert residual("first_order", 1.0, ctx) > 0.1


def test_second_order_residual_odd_symmetry_broken():
    # |dA|^3 makes the cubic non-odd: residuals at +x and -x differ
    ctx = {"tau": 1.0, "slope": -0.5, "curvature": 1.0}
    assert residual("second_order", 1.0, ctx) != pytest.approx(
        residual("second_order", -1.0, ctx))


def test_shift_residuals_use_sign_branches():
    ctx = {"tau1": 1.0, "tau2": 1.0, "tau3": 0.5, "delta_b": 0.5,
           "slope": -0.5, "shift_slope": 1.0}
    up = residual("shift_up", 0.2, ctx)
    down = residual("shift_down", 0.2, ctx)
    # tau3 enters with opposite signs on the two branches
    assert up != pytest.approx(down)
    assert up - down == pytest.approx(2 * 0.5 * 0.5 * 0.2, abs=1e-12)


def test_learning_step_residual_zero_at_fixed_point(exp1, exp1_a0):
    ctx = {"a_star": exp1_a0,
           "price_star": float(exp1.price(exp1_a0, 0.0)),
           "slope_star": float(exp1.dprice_dA(exp1_a0))}
    assert residual("learning_step", exp1_a0, ctx) < 1e-12


def test_mixture_residual_keys():
    ctx = {"psi": 0.5, "a_1": 1.0, "a_2": 2.0, "price_1": 1.5,
           "price_2": 1.2, "slope_1": -0.5, "slope_2": -0.7}
    v = residual("mixture", 1.4, ctx)
    assert v >= 0.0 and math.isfinite(v)


# ----------------------------------------------------------------------
# the closed-form battery: every defining equation, 200 coefficient draws
# ----------------------------------------------------------------------

def _quad_roots(a2, a1, a0):
    """Real roots of a2*x^2 + a1*x + a0 (a2 != 0), sorted."""
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    return sorted([(-a1 - s) / (2.0 * a2), (-a1 + s) / (2.0 * a2)])


def _window(*coeffs):
    """A Cauchy-style bound enclosing all real roots of the polynomial."""
    lead, rest = coeffs[0], coeffs[1:]
    r = 1.0 + max(abs(c) for c in rest) / abs(lead)
    return -r, r


def test_battery_matches_closed_forms():
    """find_roots recovers each equation's analytic root set, 200 draws.

    Coefficients are drawn to keep roots simple (well separated, no
    tangencies); each draw scans a window sized from the coefficients so
    nothing escapes.
    """
    rng = random.Random(7)
    checked = 0
    while checked < 200:
        tau = rng.uniform(0.1, 5.0)
        slope = -rng.uniform(0.1, 2.0)
        shift = 1.0
        db = rng.uniform(0.0, 1.5)
        curv = rng.uniform(-3.0, 3.0)
        kind = checked % 5

        if kind == 0:
            g = lambda x: tau * x * x + (1.0 - slope) * x
            want = sorted([0.0, -(1.0 - slope) / tau])
            win = _window(tau, 1.0 - slope, 0.0)
        elif kind == 1:
            a1 = 1.0 - slope + tau * db     # rising branch, tau3 := tau
            a0 = 0.5 * db * db - shift * db  # tau2 := 0.5
            g = lambda x: tau * x * x + a1 * x + a0
            want = _quad_roots(tau, a1, a0)
            win = _window(tau, a1, a0)
        elif kind == 2:
            # worst-case regime 2: x^2 + (1-slope)x - shift*db
            g = lambda x: x * x + (1.0 - slope) * x - shift * db
            want = _quad_roots(1.0, 1.0 - slope, -shift * db)
            win = _window(1.0, 1.0 - slope, shift * db)
        elif kind == 3:
            # second-order equation, signed cubic in x
            g = lambda x: (tau * abs(x) ** 3 - 0.5 * curv * x * x
                           + (1.0 - slope) * x)
            pos = _quad_roots(tau, -0.5 * curv, 1.0 - slope)
            neg = _quad_roots(tau, 0.5 * curv, -(1.0 - slope))
            want = sorted([0.0] + [r for r in pos if r > 0.0]
                          + [r for r in neg if r < 0.0])
            win = _window(tau, 0.5 * abs(curv), 1.0 - slope)
        else:
            # learning-step quadratic around a reference point
            gap = rng.uniform(-0.5, 0.5)     # price_star - a_star
            g = lambda x: x * x + (1.0 - slope) * x - gap
            want = _quad_roots(1.0, 1.0 - slope, -gap)
            win = _window(1.0, 1.0 - slope, abs(gap))

        # skip near-tangent draws: a double root has no sign change
        if any(abs(a - b) < 1e-3 for a, b in zip(want, want[1:])):
            continue
        got = find_roots(g, win[0] - 0.25, win[1] + 0.25, grid_n=4001)
        assert len(got) == len(want), (kind, got.roots, want)
        for r, w in zip(got.roots, want):
            assert r == pytest.approx(w, abs=1e-6)
            assert abs(g(r)) <= 1e-10
        checked += 1

"""Adaptive expansion-point dynamics and two-point mixtures."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyequil import (Branch, DemandSpec, LearningTrace, RootPolicy,
                       solve_ree)
from polyequil.errors import (ArgError, ComplexRootError, ExistenceError)
from polyequil.learning import (find_cycling_pair, mixture_equilibrium,
                                policy_root, simulate, step,
                                _mixture_coeffs)
from polyequil.oracle import fd_derivative, residual

from conftest import LIN_B


# ----------------------------------------------------------------------
# root policies
# ----------------------------------------------------------------------

def test_policy_parse_and_str_roundtrip():
    for text in ("plus", "minus", "alternate", "random:7"):
        assert str(RootPolicy.parse(text)) == text
    assert RootPolicy.parse("random").seed == 0
    assert str(RootPolicy.parse("random")) == "random:0"


def test_policy_rejects_unknown():
    with pytest.raises(ArgError):
        RootPolicy.parse("sideways")
    with pytest.raises(ArgError):
        RootPolicy.parse("random:many")
    with pytest.raises(ArgError):
        RootPolicy(kind="zig")


def test_policy_choose_patterns():
    alt = RootPolicy("alternate")
    assert [alt.choose(k) for k in range(4)] == [
        Branch.PLUS, Branch.MINUS, Branch.PLUS, Branch.MINUS]
    assert RootPolicy("plus").choose(17) is Branch.PLUS
    assert RootPolicy("minus").choose(0) is Branch.MINUS
    rnd = RootPolicy("random", seed=3)
    draws = [rnd.choose(k) for k in range(32)]
    # reproducible and k-indexed, not stateful
    assert draws == [RootPolicy("random", seed=3).choose(k)
                     for k in range(32)]
    assert len(set(draws)) == 2


# ----------------------------------------------------------------------
# single steps
# ----------------------------------------------------------------------

def test_policy_root_solves_expansion_quadratic(lin):
    for a_s in (0.1, 0.7, 1.2):
        ctx = {"a_star": a_s,
               "price_star": float(lin.price(a_s, LIN_B)),
               "slope_star": float(lin.dprice_dA(a_s))}
        for branch in (Branch.PLUS, Branch.MINUS):
            root = policy_root(lin, LIN_B, a_s, branch)
            assert residual("learning_step", root, ctx) <= 1e-12


def test_policy_root_branches_straddle_expansion_point(exp1):
    hi = policy_root(exp1, 0.0, 0.3, Branch.PLUS)
    lo = policy_root(exp1, 0.0, 0.3, Branch.MINUS)
    assert lo < hi
    # the two roots are symmetric about a_star - (1 - slope)/2
    slope = float(exp1.dprice_dA(0.3))
    assert 0.5 * (lo + hi) == pytest.approx(0.3 - 0.5 * (1.0 - slope),
                                            abs=1e-12)


def test_policy_root_complex_overshoot(lin):
    # far above the curve the expansion quadratic has no real root
    with pytest.raises(ComplexRootError):
        policy_root(lin, LIN_B, 2.5)


def test_policy_root_rejects_zero_branch(lin):
    with pytest.raises(ArgError):
        policy_root(lin, LIN_B, 0.5, Branch.ZERO)


def test_step_fixed_point_is_stationary(lin, lin_a0):
    rec = step(lin, LIN_B, [lin_a0])
    assert rec.root_used == "plus"
    assert rec.a_next == pytest.approx(lin_a0, abs=1e-12)
    assert not rec.tie and not rec.cycle


def test_step_needs_history(lin):
    with pytest.raises(ArgError):
        step(lin, LIN_B, [])


def test_step_skips_complex_recent_point(lin):
    # the most recent point steps into the complex plane; the scan
    # falls back to the older one, which confirms itself
    rec = step(lin, LIN_B, [0.3, 2.0])
    assert rec.a_star == 0.3
    assert rec.root_used == "plus"


def test_step_all_complex_raises(lin):
    with pytest.raises(ComplexRootError):
        step(lin, LIN_B, [1.9, 2.2])


def test_step_exact_tie_defers_to_mixture(quad):
    lo = 1.3
    root = policy_root(quad, 0.0, lo)
    hi = 2.0 * root - lo
    rec = step(quad, 0.0, [hi, lo])
    assert rec.root_used == "mixture"
    assert rec.tie and not rec.cycle
    assert rec.a_next == pytest.approx(0.5 * (lo + hi), abs=1e-12)


def test_map_derivative_vanishes_at_fixed_point(lin, exp1, quad):
    # the expansion step has a flat spot exactly at the frictionless
    # fixed point, so learning decelerates quadratically into it
    for spec, b in ((lin, LIN_B), (exp1, 0.0), (quad, 0.0)):
        a0 = solve_ree(spec, b).A0
        d = fd_derivative(lambda a: policy_root(spec, b, a), a0)
        assert abs(d) <= 1e-6


# ----------------------------------------------------------------------
# full trajectories
# ----------------------------------------------------------------------

def test_simulate_linear_from_below(lin, lin_a0):
    tr = simulate(lin, LIN_B, 0.1)
    assert isinstance(tr, LearningTrace)
    assert tr.converged
    assert len(tr.steps) == 6
    assert tr.final_gap <= 1e-8
    seq = [s.a_next for s in tr.steps]
    assert all(b > a for a, b in zip(seq, seq[1:]))
    assert all(a <= lin_a0 + 1e-12 for a in seq)
    assert all(s.root_used == "plus" for s in tr.steps)
    assert [s.t for s in tr.steps] == list(range(1, 7))


def test_simulate_monotone_for_all_families(lin, exp1, quad):
    for spec, b, prior in ((lin, LIN_B, 0.1), (exp1, 0.0, 0.05),
                           (quad, 0.0, 0.2)):
        a0 = solve_ree(spec, b).A0
        tr = simulate(spec, b, prior)
        assert tr.converged and len(tr.steps) <= 200
        assert tr.final_gap <= 1e-8
        seq = [prior] + [s.a_next for s in tr.steps]
        assert all(y > x for x, y in zip(seq, seq[1:]))
        assert all(x <= a0 + 1e-12 for x in seq[1:])


def test_simulate_preconverged_prior(lin, lin_a0):
    tr = simulate(lin, LIN_B, lin_a0)
    assert tr.converged
    assert len(tr.steps) == 1
    rec = tr.steps[0]
    assert rec.t == 0
    assert rec.root_used == "none"
    assert rec.a_next == lin_a0
    assert tr.final_gap <= 1e-12


def test_simulate_minus_policy_diverges(lin):
    tr = simulate(lin, LIN_B, 0.1, RootPolicy("minus"), t_max=50)
    assert not tr.converged
    assert len(tr.steps) == 50
    seq = [s.a_next for s in tr.steps]
    assert all(y < x for x, y in zip(seq, seq[1:]))


def test_simulate_rejects_bad_args(lin):
    with pytest.raises(ArgError):
        simulate(lin, LIN_B, 0.1, t_max=0)
    with pytest.raises(ArgError):
        simulate(lin, LIN_B, 0.1, tol=0.0)


def test_simulate_complex_prior_propagates(lin):
    with pytest.raises(ComplexRootError):
        simulate(lin, LIN_B, 3.0)


@given(prior=st.floats(min_value=0.01, max_value=1.2))
@settings(max_examples=40, deadline=None)
def test_simulate_converges_from_any_low_prior(lin, lin_a0, prior):
    tr = simulate(lin, LIN_B, prior)
    assert tr.converged
    assert abs(tr.steps[-1].a_next - lin_a0) <= 1e-8
    assert all(s.residual <= 1e-10 for s in tr.steps if s.t > 0)


# ----------------------------------------------------------------------
# two-point mixtures
# ----------------------------------------------------------------------

def _manual_pair(quad):
    lo = 1.3
    root = policy_root(quad, 0.0, lo)
    return lo, 2.0 * root - lo


def test_mixture_midpoint_indifference(quad):
    lo, hi = _manual_pair(quad)
    assert hi == pytest.approx(1.1591355718407275, abs=1e-13)
    mix = mixture_equilibrium(quad, 0.0, lo, hi)
    assert 0.0 < mix.psi < 1.0
    assert mix.A_bar == pytest.approx(0.5 * (lo + hi), abs=1e-13)
    assert abs(mix.A_bar - 1.2295677859203638) <= 1e-12
    assert mix.residual <= 1e-10
    assert not mix.degenerate


def test_mixture_aggregate_solves_weighted_equation(quad):
    lo, hi = _manual_pair(quad)
    mix = mixture_equilibrium(quad, 0.0, lo, hi)
    ctx = {"psi": mix.psi,
           "a_1": lo, "price_1": float(quad.price(lo, 0.0)),
           "slope_1": float(quad.dprice_dA(lo)),
           "a_2": hi, "price_2": float(quad.price(hi, 0.0)),
           "slope_2": float(quad.dprice_dA(hi))}
    assert residual("mixture", mix.A_bar, ctx) <= 1e-10


def test_mixture_coefficients_match_direct_moments(quad):
    lo, hi = _manual_pair(quad)
    for psi in (0.0, 0.3, 0.5, 0.77, 1.0):
        p, q = _mixture_coeffs(quad, 0.0, lo, hi, psi)
        w = 1.0 - psi
        d1, d2 = (float(quad.dprice_dA(lo)), float(quad.dprice_dA(hi)))
        p1, p2 = (float(quad.price(lo, 0.0)), float(quad.price(hi, 0.0)))
        p_direct = 1.0 - (psi * d1 + w * d2) - 2.0 * (psi * lo + w * hi)
        q_direct = ((psi * d1 * lo + w * d2 * hi)
                    + (psi * lo * lo + w * hi * hi)
                    - (psi * p1 + w * p2))
        assert p == pytest.approx(p_direct, abs=1e-14)
        assert q == pytest.approx(q_direct, abs=1e-14)


def test_mixture_q_negative_across_weights(quad):
    # -q > 0 keeps the aggregate quadratic's positive root alive for
    # every split of the population
    lo, hi = _manual_pair(quad)
    for k in range(101):
        _, q = _mixture_coeffs(quad, 0.0, lo, hi, k / 100.0)
        assert -q > 0.0


def test_mixture_degenerate_pair(quad):
    mix = mixture_equilibrium(quad, 0.0, 0.9, 0.9)
    assert mix.degenerate
    assert mix.psi == 0.5
    assert mix.residual == 0.0
    assert mix.A_bar == 0.9


def test_mixture_rejects_self_consistent_pair(exp1):
    # reflecting through the plus root of a strictly convex curve
    # shortens the return distance, so the flip-flop precondition fails
    lo = 0.8
    hi = 2.0 * policy_root(exp1, 0.0, lo) - lo
    with pytest.raises(ExistenceError):
        mixture_equilibrium(exp1, 0.0, lo, hi)


def test_find_cycling_pair_quad_and_linear(quad, lin):
    for spec, b in ((quad, 0.0), (lin, LIN_B)):
        first, other = find_cycling_pair(spec, b)
        mix = mixture_equilibrium(spec, b, first, other)
        assert 0.0 < mix.psi < 1.0
        assert mix.residual <= 1e-10


def test_find_cycling_pair_convex_raises(exp1):
    with pytest.raises(ExistenceError):
        find_cycling_pair(exp1, 0.0)


def test_mixture_psi_scans_continuously(quad):
    # away from the exact tie the crossing weight is interior and the
    # aggregate root tracks the midpoint only at the solution
    lo, hi = _manual_pair(quad)
    mix = mixture_equilibrium(quad, 0.0, lo, hi)
    p, q = _mixture_coeffs(quad, 0.0, lo, hi, mix.psi)
    root = -0.5 * p + math.sqrt(0.25 * p * p - q)
    assert root == pytest.approx(mix.A_bar, abs=1e-10)

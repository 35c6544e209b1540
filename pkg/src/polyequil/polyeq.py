"""Equilibria of markets with polynomial price forecasting.

Producers cannot evaluate the demand curve away from the reference point
``(A0, b0)`` (the fixed point of :mod:`polyequil.ree`).  They forecast the
price of a contemplated supply change ``dA`` — and, where relevant, a
demand-shifter change ``db`` — with a Taylor expansion at the reference
point, and they discount the forecast by a penalty that grows with the
size of the extrapolation.  An equilibrium is a supply level that exactly
equals its own discounted forecast.

Four penalty variants are implemented, each yielding a small closed-form
root set which is then re-validated against the sign assumptions used to
derive it:

``first_order_equilibria``
    first-order forecast, penalty ``tau*dA**2``;
``parameter_change_equilibria``
    first-order forecast in supply and shifter, penalty
    ``tau1*dA**2 + tau2*db**2 + tau3*|dA|*|db|``;
``second_order_equilibria``
    second-order forecast, penalty ``tau*|dA|**3``;
``alt_discount_equilibria``
    first-order forecast, worst-case penalty ``max(dA**2, db**2)``.

Sign conventions: every root set contains the reference point ``dA = 0``
only when it actually solves the variant's equation; roots are labeled by
which side of the quadratic formula produced them and by whether supply
ends up above (``elevated``) or below (``depressed``) the reference point.
Candidates whose derivation assumed ``dA >= 0`` but came out negative (or
vice versa) are discarded; candidates within ``1e-12`` of a sign boundary
are kept once and labeled ``boundary``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .demand import DemandSpec
from .errors import ArgError, ExistenceError

__all__ = [
    "Branch", "Regime", "Equilibrium",
    "first_order_equilibria", "parameter_change_equilibria",
    "marginal_multiplier", "second_order_equilibria",
    "alt_discount_equilibria", "regime_bound", "regime_bounds",
]

#: half-width of the band around zero / around a sign boundary within
#: which a candidate root is treated as sitting exactly on the boundary
ZERO_BAND = 1e-12


class Branch(str, enum.Enum):
    """Which arm of the quadratic formula a root came from."""
    PLUS = "plus"
    MINUS = "minus"
    ZERO = "zero"


class Regime(str, enum.Enum):
    """Where the equilibrium supply sits relative to the reference point."""
    REE = "ree"
    ELEVATED = "elevated"
    DEPRESSED = "depressed"


@dataclass(frozen=True)
class Equilibrium:
    """One candidate equilibrium.

    ``forecast_price`` is the producers' discount-free Taylor forecast at
    the equilibrium supply; ``true_price`` re-prices that supply on the
    actual curve (extrapolating outside the declared domain when needed,
    with a note in ``reason``).  ``residual`` is the absolute defect of
    the variant's defining equation, computed from the full forecast and
    penalty rather than from the reduced root formula.  Records with
    ``valid=False`` mark root pairs that left the reals; their numeric
    fields are NaN.
    """
    delta_A: float
    A: float
    forecast_price: float
    true_price: float
    residual: float
    branch: Branch
    regime: Regime
    valid: bool = True
    reason: str = ""


def _classify(da: float) -> Regime:
    if abs(da) <= ZERO_BAND:
        return Regime.REE
    return Regime.ELEVATED if da > 0.0 else Regime.DEPRESSED


def _record(spec: DemandSpec, a0: float, b_new: float, da: float,
            forecast: float, penalty: float, branch: Branch,
            reason: str = "") -> Equilibrium:
    a = a0 + da
    notes = [reason] if reason else []
    lo, hi = spec.domain
    if a < lo or a > hi:
        notes.append("true price extrapolated")
    true_price = float(spec.price(a, b_new, check=False))
    residual = abs(a - (forecast - penalty))
    return Equilibrium(delta_A=float(da), A=float(a),
                       forecast_price=float(forecast),
                       true_price=true_price, residual=float(residual),
                       branch=branch, regime=_classify(da),
                       valid=True, reason="; ".join(notes))


def _invalid(branch: Branch, regime: Regime, reason: str) -> Equilibrium:
    nan = float("nan")
    return Equilibrium(delta_A=nan, A=nan, forecast_price=nan,
                       true_price=nan, residual=nan, branch=branch,
                       regime=regime, valid=False, reason=reason)


def _sorted(records: list[Equilibrium]) -> list[Equilibrium]:
    return sorted(records, key=lambda r: (not r.valid,
                                          r.delta_A if r.valid else 0.0))


def _dedup(records: list[Equilibrium]) -> list[Equilibrium]:
    """Collapse records whose delta_A coincide within the zero band."""
    out: list[Equilibrium] = []
    for r in records:
        if r.valid and any(o.valid and abs(o.delta_A - r.delta_A) <= ZERO_BAND
                           for o in out):
            continue
        out.append(r)
    return out


# --------------------------------------------------------------------------
# first-order forecast, quadratic penalty
# --------------------------------------------------------------------------

def first_order_equilibria(spec: DemandSpec, a0: float, tau: float,
                           b0: float = 0.0) -> list[Equilibrium]:
    """Solve ``a0 + dA = price0 + slope*dA - tau*dA**2``.

    The defining equation factors as ``dA * (tau*dA + (1 - slope)) = 0``,
    so there are exactly two equilibria for ``tau > 0``: the reference
    point itself and the depressed level ``dA = -(1 - slope)/tau``, where
    the penalty for moving away from the reference point is itself what
    rationalizes the move.  For ``tau = 0`` only the reference point
    solves the equation (the slope condition ``slope <= 0`` makes the
    linear coefficient nonzero).

    Parameters: ``a0`` is the reference supply (normally the fixed point
    at ``b0``), ``tau >= 0`` the penalty weight.  Returns records sorted
    by ``delta_A``.
    """
    if tau < 0:
        raise ArgError(f"tau must be nonnegative, got {tau}")
    price0 = float(spec.price(a0, b0))
    slope = float(spec.dprice_dA(a0))

    def rec(da: float, branch: Branch, reason: str = "") -> Equilibrium:
        forecast = price0 + slope * da
        return _record(spec, a0, b0, da, forecast, tau * da * da,
                       branch, reason)

    records = [rec(0.0, Branch.ZERO)]
    if tau > 0:
        records.append(rec(-(1.0 - slope) / tau, Branch.MINUS))
    return _sorted(records)


# --------------------------------------------------------------------------
# parameter changes: forecast in supply and shifter
# --------------------------------------------------------------------------

def _shift_inputs(spec: DemandSpec, a0: float, b0: float, delta_b: float,
                  tau1: float, tau2: float, tau3: float):
    if tau1 <= 0:
        raise ArgError(f"tau1 must be positive, got {tau1}")
    if tau2 < 0 or tau3 < 0:
        raise ArgError(f"tau2 and tau3 must be nonnegative, got "
                       f"tau2={tau2}, tau3={tau3}")
    if delta_b < 0:
        raise ArgError(f"delta_b must be nonnegative here, got {delta_b}; "
                       "model depressions via the dA <= 0 branch instead")
    price0 = float(spec.price(a0, b0))
    slope = float(spec.dprice_dA(a0))
    shift_slope = float(spec.dprice_db(a0))
    return price0, slope, shift_slope


def parameter_change_equilibria(spec: DemandSpec, a0: float, b0: float,
                                delta_b: float, tau1: float,
                                tau2: float = 0.0,
                                tau3: float = 0.0) -> list[Equilibrium]:
    """Equilibria after a demand-shifter change ``delta_b >= 0``.

    Producers forecast ``price0 + slope*dA + shift_slope*delta_b`` and pay
    the penalty ``tau1*dA**2 + tau2*delta_b**2 + tau3*|dA|*delta_b``.  The
    absolute value splits the problem into a ``dA >= 0`` and a ``dA <= 0``
    quadratic; each is solved in closed form and its roots are kept only
    when they respect the branch sign.  A branch whose discriminant is
    negative contributes one ``valid=False`` record noting that its root
    pair is complex.

    With ``delta_b = 0`` the result reduces exactly to
    :func:`first_order_equilibria` with ``tau = tau1``.
    """
    price0, slope, shift_slope = _shift_inputs(
        spec, a0, b0, delta_b, tau1, tau2, tau3)
    b_new = b0 + delta_b

    def rec(da: float, branch: Branch, reason: str = "") -> Equilibrium:
        forecast = price0 + slope * da + shift_slope * delta_b
        penalty = (tau1 * da * da + tau2 * delta_b * delta_b
                   + tau3 * abs(da) * delta_b)
        return _record(spec, a0, b_new, da, forecast, penalty, branch, reason)

    records: list[Equilibrium] = []
    for sign, regime in ((1.0, Regime.ELEVATED), (-1.0, Regime.DEPRESSED)):
        u = (1.0 - slope + sign * tau3 * delta_b) / (2.0 * tau1)
        disc = (shift_slope - tau2 * delta_b) * delta_b / tau1 + u * u
        if disc < 0.0:
            side = "rising" if sign > 0 else "falling"
            records.append(_invalid(
                Branch.ZERO, regime,
                f"complex discriminant on the {side} branch; root pair "
                "dropped"))
            continue
        root_dev = math.sqrt(disc)
        for branch, da in ((Branch.PLUS, -u + root_dev),
                           (Branch.MINUS, -u - root_dev)):
            if abs(da) <= ZERO_BAND:
                records.append(rec(0.0, Branch.ZERO, "boundary"))
            elif sign * da > 0.0:
                records.append(rec(da, branch))
            # else: inconsistent with the branch's sign assumption; drop
    return _sorted(_dedup(records))


def marginal_multiplier(spec: DemandSpec, a0: float, b0: float,
                        delta_b: float, tau1: float, tau2: float = 0.0,
                        tau3: float = 0.0) -> float:
    """Derivative of the elevated equilibrium's ``dA`` in ``delta_b``.

    The elevated root is ``dA(db) = -u(db) + sqrt(D(db))`` with
    ``u = (1 - slope + tau3*db) / (2*tau1)`` and
    ``D = (shift_slope - tau2*db)*db/tau1 + u**2``; differentiating,

        d(dA)/d(db) = -tau3/(2*tau1)
                      + ((shift_slope - 2*tau2*db)/tau1 + (tau3/tau1)*u)
                        / (2*sqrt(D))

    As ``db -> 0`` this tends to the frictionless pass-through
    ``shift_slope / (1 - slope)``; for ``tau2 > 0`` it falls with ``db``
    and can turn negative well before the elevated equilibrium disappears
    at ``db = shift_slope/tau2``.  Raises :class:`ExistenceError` when no
    strictly elevated equilibrium exists at this ``delta_b``.
    """
    _, slope, shift_slope = _shift_inputs(
        spec, a0, b0, delta_b, tau1, tau2, tau3)
    u = (1.0 - slope + tau3 * delta_b) / (2.0 * tau1)
    disc = (shift_slope - tau2 * delta_b) * delta_b / tau1 + u * u
    if disc <= 0.0 or -u + math.sqrt(disc) <= ZERO_BAND:
        raise ExistenceError(
            f"no elevated equilibrium at delta_b={delta_b}: the rising "
            "branch has no strictly positive root there")
    return (-tau3 / (2.0 * tau1)
            + ((shift_slope - 2.0 * tau2 * delta_b) / tau1
               + (tau3 / tau1) * u) / (2.0 * math.sqrt(disc)))


# --------------------------------------------------------------------------
# second-order forecast, cubic penalty
# --------------------------------------------------------------------------

def second_order_equilibria(spec: DemandSpec, a0: float, tau: float,
                            b0: float = 0.0) -> list[Equilibrium]:
    """Solve ``a0 + dA = price0 + slope*dA + curv/2*dA**2 - tau*|dA|**3``.

    Root structure (beyond the ever-present reference point):

    * ``tau = 0``: one extra root ``(1 - slope)/(curv/2)`` unless the
      curvature is zero, in which case the equation is linear and only
      the reference point remains — returned alone, with a note, rather
      than raised, since a linear curve is a legitimate input.
    * ``tau > 0``: exactly one depressed root,
      ``-curv/(4*tau) - sqrt((curv/(4*tau))**2 + (1 - slope)/tau)``; and
      for convex curves with ``(curv/(4*tau))**2 > (1 - slope)/tau`` a
      pair of elevated roots ``curv/(4*tau) +/- sqrt(...)`` where the
      curvature gain outruns the cubic penalty.
    """
    if tau < 0:
        raise ArgError(f"tau must be nonnegative, got {tau}")
    price0 = float(spec.price(a0, b0))
    slope = float(spec.dprice_dA(a0))
    curv = float(spec.d2price_dA2(a0))

    def rec(da: float, branch: Branch, reason: str = "") -> Equilibrium:
        forecast = price0 + slope * da + 0.5 * curv * da * da
        return _record(spec, a0, b0, da, forecast, tau * abs(da) ** 3,
                       branch, reason)

    records = [rec(0.0, Branch.ZERO,
                   "" if (tau > 0 or curv != 0.0) else
                   "degenerate: zero curvature and zero penalty leave "
                   "only the reference point")]
    if tau == 0.0:
        if curv != 0.0:
            da = (1.0 - slope) / (0.5 * curv)
            records.append(rec(da, Branch.PLUS if da > 0 else Branch.MINUS))
        return _sorted(records)

    half = curv / (4.0 * tau)
    # depressed side: tau*dA**2 + (curv/2)*dA - (1 - slope) = 0
    records.append(rec(-half - math.sqrt(half * half + (1.0 - slope) / tau),
                       Branch.MINUS))
    # elevated side: tau*dA**2 - (curv/2)*dA + (1 - slope) = 0
    disc = half * half - (1.0 - slope) / tau
    band = ZERO_BAND * max(1.0, half * half)
    if curv > 0.0 and disc > band:
        rdev = math.sqrt(disc)
        records.append(rec(half - rdev, Branch.MINUS))
        records.append(rec(half + rdev, Branch.PLUS))
    elif curv > 0.0 and abs(disc) <= band:
        records.append(rec(half, Branch.PLUS, "tangent (double) root"))
    return _sorted(records)


# --------------------------------------------------------------------------
# worst-case penalty max(dA**2, db**2)
# --------------------------------------------------------------------------

def alt_discount_equilibria(spec: DemandSpec, a0: float, b0: float,
                            delta_b: float) -> list[Equilibrium]:
    """Equilibria under the worst-case penalty ``max(dA**2, delta_b**2)``.

    The max splits the line into two regimes, each solved in closed form
    and kept only where its own deviation really is the larger one
    (checked with strict inequalities and the usual ``1e-12`` boundary
    band):

    * regime 1, ``|dA| < |delta_b|``: the penalty is a constant there, so
      the equation is linear —
      ``dA = (shift_slope - delta_b)/(1 - slope) * delta_b``;
    * regime 2, ``|dA| > |delta_b|``: quadratic —
      ``dA = -(1 - slope)/2 +/- sqrt(shift_slope*delta_b
      + ((1 - slope)/2)**2)``.

    A candidate sitting exactly on ``|dA| = |delta_b|`` solves both
    regimes at once and is returned once, labeled ``boundary``.
    """
    if delta_b < 0:
        raise ArgError(f"delta_b must be nonnegative here, got {delta_b}")
    price0 = float(spec.price(a0, b0))
    slope = float(spec.dprice_dA(a0))
    shift_slope = float(spec.dprice_db(a0))
    b_new = b0 + delta_b

    def rec(da: float, branch: Branch, reason: str) -> Equilibrium:
        forecast = price0 + slope * da + shift_slope * delta_b
        penalty = max(da * da, delta_b * delta_b)
        return _record(spec, a0, b_new, da, forecast, penalty, branch, reason)

    def sign_branch(da: float) -> Branch:
        if abs(da) <= ZERO_BAND:
            return Branch.ZERO
        return Branch.PLUS if da > 0 else Branch.MINUS

    records: list[Equilibrium] = []

    da1 = (shift_slope - delta_b) / (1.0 - slope) * delta_b
    gap1 = abs(da1) - delta_b
    if abs(gap1) <= ZERO_BAND:
        records.append(rec(da1, sign_branch(da1), "regime1; boundary"))
    elif gap1 < 0.0:
        records.append(rec(da1, sign_branch(da1), "regime1"))

    disc = shift_slope * delta_b + ((1.0 - slope) / 2.0) ** 2
    if disc < 0.0:
        records.append(_invalid(
            Branch.ZERO, Regime.DEPRESSED,
            "complex discriminant in regime 2; root pair dropped"))
    else:
        rdev = math.sqrt(disc)
        for branch, da in ((Branch.PLUS, -(1.0 - slope) / 2.0 + rdev),
                           (Branch.MINUS, -(1.0 - slope) / 2.0 - rdev)):
            gap2 = abs(da) - delta_b
            if abs(gap2) <= ZERO_BAND:
                records.append(rec(da, branch, "regime2; boundary"))
            elif gap2 > 0.0:
                records.append(rec(da, branch, "regime2"))
    return _sorted(_dedup(records))


def _crossing_bound(slope: float, shift_slope: float, root_sign: int,
                    xtol: float = 1e-10) -> float:
    """Largest ``db > 0`` at which the regime-2 root magnitude equals ``db``.

    Works on the raw coefficients so it can be exercised for parameter
    combinations the shipped demand families cannot produce.  The regime-2
    root is ``-(1 - slope)/2 + root_sign*sqrt(shift_slope*db +
    ((1 - slope)/2)**2)``; this function bisects ``|root(db)| - db = 0``
    to absolute tolerance ``xtol``.
    """
    half = (1.0 - slope) / 2.0

    def gap(db: float) -> float:
        return abs(-half + root_sign * math.sqrt(shift_slope * db
                                                 + half * half)) - db

    hi = max(1.0, shift_slope + 2.0 * half)
    it = 0
    while gap(hi) >= 0.0:
        hi *= 2.0
        it += 1
        if it > 100:
            raise ExistenceError("regime-2 root magnitude never falls "
                                 "below delta_b; no crossing to report")
    if root_sign < 0:
        lo = 0.0  # gap(0) = (1 - slope) > 0
    else:
        # gap(0) = 0 is itself a (trivial) crossing; look for an interior
        # point where the root magnitude exceeds db, then bracket the
        # nontrivial crossing above it.
        lo = 0.0
        probe = hi
        for _ in range(80):
            probe *= 0.5
            if gap(probe) > 0.0:
                lo = probe
                break
        else:
            raise ExistenceError(
                "the rising regime-2 root never overtakes delta_b (its "
                "pass-through at zero is at most one); no upper bound "
                "exists")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if gap(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def regime_bound(spec: DemandSpec, a0: float, b0: float,
                 root: Branch | str = Branch.MINUS) -> float:
    """Shifter size where the chosen regime-2 root stops dominating.

    For the minus root the bound always exists (``db1 = shift_slope +
    (1 - slope)`` analytically).  For the plus root it exists only when
    the frictionless pass-through exceeds one, which no shipped family
    attains — :class:`ExistenceError` otherwise.
    """
    branch = Branch(root)
    if branch is Branch.ZERO:
        raise ArgError("root must be 'plus' or 'minus'")
    slope = float(spec.dprice_dA(a0))
    shift_slope = float(spec.dprice_db(a0))
    if branch is Branch.PLUS and shift_slope / (1.0 - slope) <= 1.0:
        raise ExistenceError(
            "no upper regime bound for the plus root: the frictionless "
            f"pass-through {shift_slope / (1.0 - slope):.6g} does not "
            "exceed one")
    return _crossing_bound(slope, shift_slope,
                           +1 if branch is Branch.PLUS else -1)


def regime_bounds(spec: DemandSpec, a0: float,
                  b0: float) -> tuple[float, float]:
    """Both regime-crossing shifter sizes ``(db1, db2)``.

    ``db1`` bounds the minus root, ``db2`` the plus root.  Since ``db2``
    requires a pass-through above one, this pair form raises
    :class:`ExistenceError` whenever that fails; use
    :func:`regime_bound` to retrieve ``db1`` alone in that case.
    """
    return (regime_bound(spec, a0, b0, Branch.MINUS),
            regime_bound(spec, a0, b0, Branch.PLUS))

"""Rational-expectations fixed point.

The benchmark outcome is the supply level that prices at itself:
``A0 = price(A0, b)``.  With a positive price at zero supply and a
non-increasing price in supply, ``g(A) = A - price(A, b)`` is strictly
increasing with ``g(0) < 0``, so the fixed point exists and is unique on
any domain whose upper edge has ``g > 0``.  Bisection is all it takes.

``ree_multiplier`` is the frictionless comparative static of that fixed
point in the demand shifter: differentiating ``A0(b) = price(A0(b), b)``
gives ``dA0/db = price_b / (1 - price_A)``, evaluated at the fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

from .demand import DemandSpec
from .errors import ArgError, BracketError

__all__ = ["ReePoint", "solve_ree", "ree_multiplier"]


@dataclass(frozen=True)
class ReePoint:
    """A solved fixed point: supply, the (equal) price, and solve stats."""
    A0: float
    P0: float
    b: float
    residual: float
    iterations: int


def solve_ree(spec: DemandSpec, b: float, tol: float = 1e-12) -> ReePoint:
    """Bisect ``A = price(A, b)`` on the curve's domain.

    ``tol`` is an absolute bound on the residual ``|A0 - price(A0, b)|``
    of the returned point.  Raises :class:`BracketError` when the fixed
    point is not bracketed by ``[0, a_max]`` (price nonpositive at zero
    supply, or demand still above supply at the domain edge) or when
    float resolution cannot reach ``tol``.
    """
    if not tol > 0:
        raise ArgError(f"tol must be positive, got {tol}")
    g = lambda a: a - spec.price(a, b)
    lo, hi = 0.0, spec.a_max
    if g(lo) >= 0.0:
        raise BracketError(
            f"price at zero supply is not positive (b={b}); no interior "
            "fixed point")
    if g(hi) < 0.0:
        raise BracketError(
            f"demand exceeds supply across all of [0, {spec.a_max}]; "
            "the fixed point lies beyond the domain")

    # Polish the bracket all the way to float resolution (~55 halvings)
    # rather than stopping at the first mid with |g| <= tol: the extra
    # iterations are free and leave the fixed point good to the last bit.
    iterations = 0
    eps = 2.220446049250313e-16
    while hi - lo > eps * max(1.0, abs(lo), abs(hi)) and iterations < 200:
        mid = 0.5 * (lo + hi)
        r = float(g(mid))
        iterations += 1
        if r == 0.0:
            lo = hi = mid
            break
        if r < 0.0:
            lo = mid
        else:
            hi = mid

    a0 = 0.5 * (lo + hi)
    p0 = float(spec.price(a0, b))
    residual = abs(a0 - p0)
    if residual > tol:
        raise BracketError(
            f"residual stalled at {residual:.3g} > tol={tol}; requested "
            "tolerance is below float resolution here")
    return ReePoint(A0=a0, P0=p0, b=float(b), residual=residual,
                    iterations=iterations)


def ree_multiplier(spec: DemandSpec, b: float, tol: float = 1e-12) -> float:
    """Shifter pass-through ``price_b / (1 - price_A)`` at the fixed point.

    Positive whenever the curve slopes down, and below 1 exactly when the
    slope is strictly negative; a flat curve passes the shifter through
    one-for-one.
    """
    point = solve_ree(spec, b, tol=tol)
    d1 = spec.dprice_dA(point.A0)
    return float(spec.dprice_db(point.A0) / (1.0 - d1))

"""Slow, independent numerical checks.

Nothing in here is shared with the solvers: roots come from a dense
sign-change scan refined by bisection, derivatives from central
differences, and residuals from re-evaluating each defining equation in
its rawest written-out form.  Tests compare solver output against this
module; the solvers never call it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import NonFiniteError, UnknownEquationError

__all__ = ["RootSet", "find_roots", "fd_derivative", "residual",
           "equation_ids"]


@dataclass(frozen=True)
class RootSet:
    """All simple roots found on an interval."""
    roots: tuple[float, ...]
    bracket_count: int
    grid_n: int
    interval: tuple[float, float]

    def __len__(self) -> int:
        return len(self.roots)


def find_roots(g: Callable[[float], float], lo: float, hi: float,
               grid_n: int = 20_001, refine_tol: float = 1e-12,
               merge_tol: float = 1e-6) -> RootSet:
    """Scan ``[lo, hi]`` on an even grid and bisect every sign change.

    Only simple (sign-changing) roots are in contract; a root the grid
    steps over without a sign flip, e.g. a tangency, is missed.  Roots
    closer than ``merge_tol`` are merged to their mean.  Raises
    :class:`NonFiniteError` if ``g`` produces a NaN or infinity anywhere
    on the grid.
    """
    if not hi > lo:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    xs = np.linspace(lo, hi, grid_n)
    with np.errstate(all="ignore"):
        try:
            ys = np.asarray(g(xs), dtype=float)
            if ys.shape != xs.shape:
                raise TypeError
        except Exception:
            ys = np.array([float(g(x)) for x in xs])
    if not np.all(np.isfinite(ys)):
        i = int(np.flatnonzero(~np.isfinite(ys))[0])
        raise NonFiniteError(f"g({xs[i]!r}) = {ys[i]!r} while scanning "
                             f"[{lo}, {hi}]")

    found: list[float] = []
    exact = np.flatnonzero(ys == 0.0)
    found.extend(float(xs[i]) for i in exact)

    flips = np.flatnonzero(ys[:-1] * ys[1:] < 0.0)
    for i in flips:
        a, b = float(xs[i]), float(xs[i + 1])
        fa = float(ys[i])
        while b - a > refine_tol:
            m = 0.5 * (a + b)
            fm = float(g(m))
            if fm == 0.0:
                a = b = m
                break
            if (fa < 0.0) == (fm < 0.0):
                a, fa = m, fm
            else:
                b = m
        found.append(0.5 * (a + b))

    bracket_count = len(exact) + len(flips)
    found.sort()
    merged: list[list[float]] = []
    for r in found:
        if merged and r - merged[-1][-1] <= merge_tol:
            merged[-1].append(r)
        else:
            merged.append([r])
    roots = tuple(float(np.mean(cluster)) for cluster in merged)
    return RootSet(roots=roots, bracket_count=bracket_count,
                   grid_n=grid_n, interval=(float(lo), float(hi)))


def fd_derivative(g: Callable[[float], float], x: float,
                  h: float | None = None) -> float:
    """Central finite difference, step ``1e-6 * max(1, |x|)`` by default."""
    if h is None:
        h = 1e-6 * max(1.0, abs(x))
    return (float(g(x + h)) - float(g(x - h))) / (2.0 * h)


# --------------------------------------------------------------------------
# Residual registry.  Each entry re-states one defining equation with every
# term written out, evaluated at a candidate root plus a context of plain
# floats; the result is the absolute defect.  Keys follow the argument
# names the tests use:
#   slope        first derivative of the demand curve at the expansion point
#   curvature    second derivative at the expansion point
#   shift_slope  derivative of price in the shifter (1 for these families)
# --------------------------------------------------------------------------

def _first_order(da: float, ctx: Mapping[str, float]) -> float:
    # zero of: tau*dA^2 + (1 - slope)*dA
    return abs(ctx["tau"] * da * da + (1.0 - ctx["slope"]) * da)


def _shift_up(da: float, ctx: Mapping[str, float]) -> float:
    # dA >= 0 branch of the parameter-change problem:
    # tau1*dA^2 + (1 - slope + tau3*db)*dA + tau2*db^2 - shift_slope*db = 0
    db = ctx["delta_b"]
    return abs(ctx["tau1"] * da * da
               + (1.0 - ctx["slope"] + ctx["tau3"] * db) * da
               + ctx["tau2"] * db * db - ctx["shift_slope"] * db)


def _shift_down(da: float, ctx: Mapping[str, float]) -> float:
    # dA <= 0 branch: the |dA|*|db| cross-penalty flips sign
    db = ctx["delta_b"]
    return abs(ctx["tau1"] * da * da
               + (1.0 - ctx["slope"] - ctx["tau3"] * db) * da
               + ctx["tau2"] * db * db - ctx["shift_slope"] * db)


def _second_order(da: float, ctx: Mapping[str, float]) -> float:
    # tau*|dA|^3 - (curvature/2)*dA^2 + (1 - slope)*dA = 0
    return abs(ctx["tau"] * abs(da) ** 3
               - 0.5 * ctx["curvature"] * da * da
               + (1.0 - ctx["slope"]) * da)


def _worstcase_r1(da: float, ctx: Mapping[str, float]) -> float:
    # |db| > |dA| regime of the worst-case penalty max(dA^2, db^2):
    # (1 - slope)*dA + (db - shift_slope)*db = 0
    db = ctx["delta_b"]
    return abs((1.0 - ctx["slope"]) * da
               + (db - ctx["shift_slope"]) * db)


def _worstcase_r2(da: float, ctx: Mapping[str, float]) -> float:
    # |dA| > |db| regime: dA^2 + (1 - slope)*dA - shift_slope*db = 0
    return abs(da * da + (1.0 - ctx["slope"]) * da
               - ctx["shift_slope"] * ctx["delta_b"])


def _expansion_quadratic(a_new: float, a_ref: float, price_ref: float,
                         slope_ref: float) -> float:
    # a_new = price_ref + slope_ref*(a_new - a_ref) - (a_new - a_ref)^2,
    # i.e. supply equals the first-order price forecast around a_ref net
    # of the squared-deviation penalty.
    eps = a_new - a_ref
    return abs(eps * eps + (1.0 - slope_ref) * eps + (a_ref - price_ref))


def _learning_step(a_next: float, ctx: Mapping[str, float]) -> float:
    return _expansion_quadratic(a_next, ctx["a_star"], ctx["price_star"],
                                ctx["slope_star"])


def _agent_forecast(forecast: float, ctx: Mapping[str, float]) -> float:
    return _expansion_quadratic(forecast, ctx["a_i"], ctx["price_i"],
                                ctx["slope_i"])


def _mixture(agg: float, ctx: Mapping[str, float]) -> float:
    # agg = psi*s1(agg) + (1-psi)*s2(agg), where group k expands around
    # a_k and supplies s_k(A) = price_k + slope_k*(A - a_k) - (A - a_k)^2
    psi = ctx["psi"]
    s1 = (ctx["price_1"] + ctx["slope_1"] * (agg - ctx["a_1"])
          - (agg - ctx["a_1"]) ** 2)
    s2 = (ctx["price_2"] + ctx["slope_2"] * (agg - ctx["a_2"])
          - (agg - ctx["a_2"]) ** 2)
    return abs(agg - psi * s1 - (1.0 - psi) * s2)


_EQUATIONS: dict[str, Callable[[float, Mapping[str, float]], float]] = {
    "first_order": _first_order,
    "shift_up": _shift_up,
    "shift_down": _shift_down,
    "second_order": _second_order,
    "worstcase_r1": _worstcase_r1,
    "worstcase_r2": _worstcase_r2,
    "learning_step": _learning_step,
    "agent_forecast": _agent_forecast,
    "mixture": _mixture,
}


def equation_ids() -> tuple[str, ...]:
    """Names accepted by :func:`residual`."""
    return tuple(sorted(_EQUATIONS))


def residual(equation_id: str, candidate: float,
             ctx: Mapping[str, float]) -> float:
    """Absolute defect of ``candidate`` in the named defining equation.

    ``ctx`` supplies the equation's coefficients as plain floats (see the
    registry comments for the key names).  Unknown names raise
    :class:`UnknownEquationError`.
    """
    try:
        fn = _EQUATIONS[equation_id]
    except KeyError:
        raise UnknownEquationError(
            f"no equation named {equation_id!r}; known: "
            f"{', '.join(equation_ids())}") from None
    return float(fn(float(candidate), ctx))

"""Aggregation when each producer knows a different demand point.

Producer ``i`` has observed the curve only at supply ``a_i``.  Their
supply solves the same expansion quadratic as one learning step around
``a_i`` (first-order forecast net of the squared deviation), picking the
plus or minus root by convention.  The population of known points is
described by a density; aggregate supply is the density-weighted integral
of the individual supplies, computed with composite Simpson on an odd
node grid and re-checked by doubling the panel count.

For convex (or linear) demand, every individual supply sits at or below
the frictionless fixed point — the first-order forecast of a convex
curve never under-prices, so the penalty can only pull supply down — and
the aggregate inherits the bound.  :func:`convexity_bound_check` audits
exactly that, node by node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .demand import DemandSpec, Family
from .errors import (ArgError, ComplexForecastError, ComplexRootError,
                     DomainError, HypothesisError, QuadratureError)
from .learning import policy_root
from .polyeq import Branch
from .ree import solve_ree

__all__ = ["Uniform", "TruncatedGaussian", "PointMass", "Density",
           "PopulationSpec", "AsymEquilibrium", "ConvexityReport",
           "agent_forecast", "agent_supply", "aggregate",
           "convexity_bound_check", "simpson"]


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ArgError(f"uniform needs lo < hi, got [{self.lo}, "
                           f"{self.hi}]")

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)[()]


@dataclass(frozen=True)
class TruncatedGaussian:
    """Normal(mean, sd) conditioned on [lo, hi]."""
    mean: float
    sd: float
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ArgError(f"truncation needs lo < hi, got [{self.lo}, "
                           f"{self.hi}]")
        if not self.sd > 0:
            raise ArgError(f"sd must be positive, got {self.sd}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def _cdf_std(self, z: float) -> float:
        return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        mass = (self._cdf_std((self.hi - self.mean) / self.sd)
                - self._cdf_std((self.lo - self.mean) / self.sd))
        z = (x - self.mean) / self.sd
        core = np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2.0 * math.pi))
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, core / mass, 0.0)[()]


@dataclass(frozen=True)
class PointMass:
    """Everyone knows the same point; no quadrature involved."""
    at: float

    @property
    def support(self) -> tuple[float, float]:
        return (self.at, self.at)


Density = Union[Uniform, TruncatedGaussian, PointMass]


@dataclass(frozen=True)
class PopulationSpec:
    """A density of known points plus the quadrature panel count.

    ``quad_n`` must be odd (composite Simpson pairs panels) and at least
    11.  Continuous densities are self-checked at construction: their
    mass on the support must integrate to 1 within 1e-8 at this node
    count, so a density too spiky for its own grid is rejected up front.
    """
    density: Density
    quad_n: int = 2001

    def __post_init__(self):
        if not isinstance(self.density, (Uniform, TruncatedGaussian,
                                         PointMass)):
            raise ArgError(f"unsupported density {type(self.density)!r}")
        if self.quad_n < 11 or self.quad_n % 2 == 0:
            raise ArgError(
                f"quad_n must be odd and >= 11, got {self.quad_n}")
        if not isinstance(self.density, PointMass):
            lo, hi = self.density.support
            xs = np.linspace(lo, hi, self.quad_n)
            mass = simpson(np.asarray(self.density.pdf(xs)), lo, hi)
            if abs(mass - 1.0) > 1e-8:
                raise QuadratureError(
                    f"density mass integrates to {mass!r} on {self.quad_n} "
                    "nodes; refine quad_n or widen the support")


def simpson(values: np.ndarray, lo: float, hi: float) -> float:
    """Composite Simpson rule over evenly spaced samples (odd count)."""
    n = len(values)
    if n < 3 or n % 2 == 0:
        raise ArgError(f"simpson needs an odd sample count >= 3, got {n}")
    h = (hi - lo) / (n - 1)
    return float(h / 3.0 * (values[0] + values[-1]
                            + 4.0 * values[1:-1:2].sum()
                            + 2.0 * values[2:-1:2].sum()))


def agent_forecast(spec: DemandSpec, b: float, a_i: float,
                   branch: Branch | str = Branch.PLUS) -> float:
    """Forecast price of a producer who knows the curve only at ``a_i``.

    Solves ``F = price(a_i) + slope(a_i)*(F - a_i) - (F - a_i)**2`` for
    the chosen root.  Raises :class:`ComplexForecastError` when the
    quadratic has no real solution at this known point.
    """
    try:
        return policy_root(spec, b, a_i, branch)
    except ComplexRootError as e:
        raise ComplexForecastError(str(e)) from None


def agent_supply(spec: DemandSpec, b: float, a_i: float,
                 branch: Branch | str = Branch.PLUS) -> float:
    """Supply of that producer: the discounted forecast, re-evaluated.

    Deliberately recomputes the right-hand side from the forecast rather
    than returning the root, so the identity supply == forecast is a
    checkable property instead of a tautology.
    """
    f = agent_forecast(spec, b, a_i, branch)
    eps = f - a_i
    return (float(spec.price(a_i, b, check=False))
            + float(spec.dprice_dA(a_i, check=False)) * eps - eps * eps)


@dataclass(frozen=True)
class AsymEquilibrium:
    """Aggregate outcome for one population and root branch."""
    branch: Branch
    aggregate_A: float
    nodes: tuple[float, ...]
    forecasts: tuple[float, ...]
    supplies: tuple[float, ...]
    quad_error_est: float
    below_ree: bool
    a0: float

    @property
    def agent_curve(self) -> list[tuple[float, float, float]]:
        """(known point, forecast, supply) triples on the node grid."""
        return list(zip(self.nodes, self.forecasts, self.supplies))


def _node_values(spec: DemandSpec, b: float, nodes: np.ndarray,
                 branch: Branch) -> tuple[np.ndarray, np.ndarray]:
    forecasts = np.array([agent_forecast(spec, b, float(a), branch)
                          for a in nodes])
    supplies = np.array([agent_supply(spec, b, float(a), branch)
                         for a in nodes])
    return forecasts, supplies


def aggregate(spec: DemandSpec, b: float, pop: PopulationSpec,
              branch: Branch | str = Branch.PLUS) -> AsymEquilibrium:
    """Density-weighted aggregate supply.

    The support must lie inside the curve's declared domain.  For
    continuous densities the integral runs on ``pop.quad_n`` Simpson
    nodes and is re-run on ``2*quad_n - 1`` nodes; the difference is
    reported as ``quad_error_est`` and must not exceed 1e-6
    (:class:`QuadratureError` otherwise).  A complex forecast at any
    node aborts the whole aggregation, consistent with the forecast
    contract.
    """
    branch = Branch(branch)
    if branch is Branch.ZERO:
        raise ArgError("branch must be 'plus' or 'minus'")
    lo, hi = pop.density.support
    dom_lo, dom_hi = spec.domain
    if lo < dom_lo or hi > dom_hi:
        raise DomainError(
            f"density support [{lo}, {hi}] leaves the curve domain "
            f"[{dom_lo}, {dom_hi}]")
    a0 = solve_ree(spec, b).A0

    if isinstance(pop.density, PointMass):
        at = pop.density.at
        f = agent_forecast(spec, b, at, branch)
        s = agent_supply(spec, b, at, branch)
        return AsymEquilibrium(branch=branch, aggregate_A=s, nodes=(at,),
                               forecasts=(f,), supplies=(s,),
                               quad_error_est=0.0,
                               below_ree=s <= a0 + 1e-10, a0=a0)

    nodes = np.linspace(lo, hi, pop.quad_n)
    forecasts, supplies = _node_values(spec, b, nodes, branch)
    agg = simpson(supplies * np.asarray(pop.density.pdf(nodes)), lo, hi)

    nodes2 = np.linspace(lo, hi, 2 * pop.quad_n - 1)
    _, supplies2 = _node_values(spec, b, nodes2, branch)
    agg2 = simpson(supplies2 * np.asarray(pop.density.pdf(nodes2)), lo, hi)
    err = abs(agg - agg2)
    if err > 1e-6:
        raise QuadratureError(
            f"aggregate moved by {err:.3g} when doubling the panels "
            f"({pop.quad_n} nodes); raise quad_n")

    return AsymEquilibrium(branch=branch, aggregate_A=float(agg),
                           nodes=tuple(float(x) for x in nodes),
                           forecasts=tuple(float(x) for x in forecasts),
                           supplies=tuple(float(x) for x in supplies),
                           quad_error_est=float(err),
                           below_ree=agg <= a0 + 1e-10, a0=a0)


@dataclass(frozen=True)
class ConvexityReport:
    """Node-by-node audit that supplies never exceed the fixed point."""
    ok: bool
    a0: float
    family_warning: str
    max_violation: float            # max over nodes/branches of s - a0
    aggregates: dict[str, float]    # branch name -> aggregate supply
    dispersion: dict[str, tuple[float, float, float]]  # min, max, std
    n_nodes: int


def convexity_bound_check(spec: DemandSpec, b: float, pop: PopulationSpec,
                          branches: tuple[Branch, ...] = (Branch.PLUS,
                                                          Branch.MINUS),
                          ) -> ConvexityReport:
    """Audit the convexity bound: supply <= fixed point, node by node.

    The bound rests on the forecast line never dipping under a convex
    curve; a concave curve voids the premise, so quad-concave input
    raises :class:`HypothesisError` rather than producing a meaningless
    report.  Linear curves satisfy the bound only weakly (tangent line
    equals the curve) and are flagged with a warning string.
    """
    if spec.family is Family.QUAD_CONCAVE:
        raise HypothesisError(
            "the supply bound presumes convex demand; quad_concave "
            "curves do not qualify")
    warning = ("linear demand is only weakly convex; the bound holds "
               "with equality of forecasts, not slack"
               if spec.family is Family.LINEAR else "")
    aggregates: dict[str, float] = {}
    dispersion: dict[str, tuple[float, float, float]] = {}
    worst = -math.inf
    a0 = solve_ree(spec, b).A0
    n_nodes = 0
    for branch in branches:
        eq = aggregate(spec, b, pop, branch)
        supplies = np.asarray(eq.supplies)
        n_nodes = len(supplies)
        worst = max(worst, float(np.max(supplies - a0)),
                    eq.aggregate_A - a0)
        aggregates[branch.value] = eq.aggregate_A
        dispersion[branch.value] = (float(np.min(supplies)),
                                    float(np.max(supplies)),
                                    float(np.std(supplies)))
    return ConvexityReport(ok=worst <= 1e-10, a0=a0,
                           family_warning=warning,
                           max_violation=worst, aggregates=aggregates,
                           dispersion=dispersion, n_nodes=n_nodes)

"""Inverse-demand curves.

Three one-dimensional families, each mapping aggregate supply ``A`` and an
additive demand shifter ``b`` to a market price:

=============  =============================  ==========================
family         price(A, b)                    shape restrictions
=============  =============================  ==========================
linear         ``b + c - m*A``                ``c > 0``, ``m > 0``
exp_convex     ``b + c*exp(-alpha*A)``        ``c > 0``, ``alpha > 0``
quad_concave   ``b + c - m*A - kappa*A**2``   ``c > 0``, ``m > 0``,
                                              ``kappa > 0``; used only
                                              where the price is positive
=============  =============================  ==========================

The shifter enters additively in every family, so the price sensitivity to
``b`` is identically 1.  Downward-sloping demand requires a strictly
negative slope in ``A``; ``linear`` with ``m = 0`` is accepted by the
constructor as a flat limiting case (it still has a unique fixed point)
but is reported by :meth:`DemandSpec.validate`.

Curves carry an explicit domain ``[0, a_max]``.  When no ``a_max`` is
given, the factories size it as four times a rough fixed-point estimate of
``A = price(A, b_ref)``, capped for ``quad_concave`` just below the point
where the price would turn negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgError, BracketError, DomainError, ShapeError

__all__ = ["Family", "DemandSpec", "ValidationReport"]


class Family(str, enum.Enum):
    LINEAR = "linear"
    EXP_CONVEX = "exp_convex"
    QUAD_CONCAVE = "quad_concave"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a grid audit of one curve.

    Attributes
    ----------
    ok : bool
        True when no issue was found.
    issues : tuple of str
        Human-readable description of each violated property.
    fd_slope_err, fd_curvature_err : float
        Worst relative disagreement between the analytic first/second
        derivative and a central finite difference over the audit grid.
    grid_n : int
        Number of audit points.
    b : float
        Shifter value at which positivity was audited.
    """

    ok: bool
    issues: tuple[str, ...]
    fd_slope_err: float
    fd_curvature_err: float
    grid_n: int
    b: float


@dataclass(frozen=True)
class DemandSpec:
    """One inverse-demand curve with its domain.

    Build instances through the factory classmethods (:meth:`linear`,
    :meth:`exp_convex`, :meth:`quad_concave`) rather than the raw
    constructor; the factories check the shape restrictions and size the
    domain.
    """

    family: Family
    c: float
    m: float = 0.0
    alpha: float = 0.0
    kappa: float = 0.0
    a_max: float = field(default=0.0)

    # -- construction -------------------------------------------------

    @classmethod
    def linear(cls, c: float, m: float, a_max: float | None = None,
               b_ref: float = 0.0) -> "DemandSpec":
        """Curve ``b + c - m*A``.

        Parameters
        ----------
        c : float
            Intercept above the shifter, must be positive.
        m : float
            Slope magnitude, must be nonnegative.  ``m = 0`` gives a flat
            curve; it is accepted (see module notes) but flagged by
            :meth:`validate`.
        a_max : float, optional
            Domain upper edge.  Defaults to four times the fixed point of
            ``A = price(A, b_ref)``.
        b_ref : float
            Shifter used only for the default domain sizing.
        """
        if not (c > 0):
            raise ShapeError(f"linear demand needs c > 0, got c={c}")
        if not (m > 0):
            raise ShapeError(f"linear demand needs m > 0, got m={m}")
        spec = cls(Family.LINEAR, c=c, m=m)
        return spec._with_domain(a_max, b_ref)

    @classmethod
    def exp_convex(cls, c: float, alpha: float, a_max: float | None = None,
                   b_ref: float = 0.0) -> "DemandSpec":
        """Curve ``b + c*exp(-alpha*A)`` (strictly convex in ``A``)."""
        if not (c > 0):
            raise ShapeError(f"exp_convex demand needs c > 0, got c={c}")
        if not (alpha > 0):
            raise ShapeError(
                f"exp_convex demand needs alpha > 0, got alpha={alpha}")
        spec = cls(Family.EXP_CONVEX, c=c, alpha=alpha)
        return spec._with_domain(a_max, b_ref)

    @classmethod
    def quad_concave(cls, c: float, m: float, kappa: float,
                     a_max: float | None = None,
                     b_ref: float = 0.0) -> "DemandSpec":
        """Curve ``b + c - m*A - kappa*A**2`` (strictly concave in ``A``).

        The default domain is additionally capped just below the root of
        ``price(A, b_ref) = 0`` so the whole domain has positive prices.
        """
        if not (c > 0):
            raise ShapeError(f"quad_concave demand needs c > 0, got c={c}")
        if not (m > 0):
            raise ShapeError(f"quad_concave demand needs m > 0, got m={m}")
        if not (kappa > 0):
            raise ShapeError(
                f"quad_concave demand needs kappa > 0, got kappa={kappa}")
        spec = cls(Family.QUAD_CONCAVE, c=c, m=m, kappa=kappa)
        return spec._with_domain(a_max, b_ref)

    def _with_domain(self, a_max: float | None, b_ref: float) -> "DemandSpec":
        if a_max is None:
            a_max = 4.0 * self._fixed_point_estimate(b_ref)
            if self.family is Family.QUAD_CONCAVE:
                # keep the default strictly inside the positive-price
                # region; an explicit a_max may exceed it, in which case
                # validate() reports the violation instead.
                disc = self.m * self.m + 4.0 * self.kappa * (b_ref + self.c)
                a_pos = (-self.m + math.sqrt(disc)) / (2.0 * self.kappa)
                a_max = min(a_max, a_pos * (1.0 - 1e-9))
        if not (a_max > 0) or not math.isfinite(a_max):
            raise ArgError(f"a_max must be finite and positive, got {a_max}")
        return replace(self, a_max=float(a_max))

    def _fixed_point_estimate(self, b: float, tol: float = 1e-9) -> float:
        # Coarse self-contained bisection of A = price(A, b); used only to
        # size default domains, so it deliberately avoids importing the
        # real solver.
        g = lambda a: a - self.price(a, b, check=False)
        lo, hi = 0.0, 1.0
        it = 0
        while g(hi) < 0.0:
            hi *= 2.0
            it += 1
            if it > 200:
                raise BracketError(
                    "could not bracket a fixed point while sizing the "
                    f"domain of {self.family.value} demand at b={b}")
        while hi - lo > tol * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if g(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # -- evaluation ----------------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        """The interval ``[0, a_max]`` the curve is declared on."""
        return (0.0, self.a_max)

    def _check_domain(self, a) -> None:
        bad = (np.asarray(a) < 0.0) | (np.asarray(a) > self.a_max)
        if np.any(bad):
            raise DomainError(
                f"supply outside the declared domain [0, {self.a_max!r}]")

    def price(self, a, b, check: bool = True):
        """Market price at supply ``a`` and shifter ``b``.

        Parameters
        ----------
        a : float or ndarray
            Aggregate supply.
        b : float
            Additive demand shifter.
        check : bool
            When True (default), raise :class:`DomainError` if ``a`` lies
            outside ``[0, a_max]``.  Solvers that need to price a
            hypothetical out-of-domain supply pass ``check=False`` and
            label the result as extrapolated.
        """
        if check:
            self._check_domain(a)
        if self.family is Family.LINEAR:
            return b + self.c - self.m * a
        if self.family is Family.EXP_CONVEX:
            return b + self.c * np.exp(-self.alpha * a)
        return b + self.c - self.m * a - self.kappa * a * a

    @staticmethod
    def _const_like(a, value: float):
        if np.ndim(a):
            return np.full(np.shape(a), value)
        return value

    def dprice_dA(self, a, check: bool = True):
        """First derivative of the price in supply."""
        if check:
            self._check_domain(a)
        if self.family is Family.LINEAR:
            return self._const_like(a, -self.m)
        if self.family is Family.EXP_CONVEX:
            return -self.c * self.alpha * np.exp(-self.alpha * a)
        return -self.m - 2.0 * self.kappa * a

    def d2price_dA2(self, a, check: bool = True):
        """Second derivative of the price in supply."""
        if check:
            self._check_domain(a)
        if self.family is Family.LINEAR:
            return self._const_like(a, 0.0)
        if self.family is Family.EXP_CONVEX:
            return self.c * self.alpha ** 2 * np.exp(-self.alpha * a)
        return self._const_like(a, -2.0 * self.kappa)

    def dprice_db(self, a, check: bool = True):
        """Price sensitivity to the shifter: identically 1 here."""
        if check:
            self._check_domain(a)
        return self._const_like(a, 1.0)

    # -- auditing -------------------------------------------------------

    def validate(self, grid_n: int = 201, b: float = 0.0) -> ValidationReport:
        """Audit the curve on an even grid over its domain.

        Checks, at ``grid_n`` points spanning ``[0, a_max]``:

        * positive prices at shifter ``b``,
        * strictly negative slope,
        * the family's curvature sign (zero / positive / negative),
        * analytic first and second derivatives against central finite
          differences (step ``1e-5 * max(1, |A|)``, relative tolerance
          ``1e-6`` against ``max(1, |analytic|)``).

        Returns a :class:`ValidationReport`; nothing is raised for a
        failed audit.
        """
        if grid_n < 3:
            raise ArgError(f"grid_n must be at least 3, got {grid_n}")
        grid = np.linspace(0.0, self.a_max, grid_n)
        issues: list[str] = []

        p = np.asarray(self.price(grid, b))
        if p[0] <= 0.0:
            issues.append(f"price not positive at zero supply (b={b})")
        if self.family is Family.QUAD_CONCAVE:
            # in-domain positivity is a validity condition specific to
            # the concave parabola; for the other families only the
            # intercept matters (a linear curve crossing zero is a
            # domain-sizing matter, not a shape defect)
            n_nonpos = int(np.sum(p <= 0.0))
            if n_nonpos:
                issues.append(
                    f"price not positive at {n_nonpos}/{grid_n} grid "
                    f"points (b={b}); first at A={grid[p <= 0.0][0]:.6g}")

        d1 = np.asarray(self.dprice_dA(grid))
        n_flat = int(np.sum(d1 >= 0.0))
        if n_flat:
            issues.append(
                f"slope not strictly negative at {n_flat}/{grid_n} grid "
                "points (flat or upward demand)")

        d2 = np.asarray(self.d2price_dA2(grid))
        if self.family is Family.LINEAR:
            if np.any(d2 != 0.0):
                issues.append("linear curvature must be exactly zero")
        elif self.family is Family.EXP_CONVEX:
            if np.any(d2 <= 0.0):
                issues.append("exp_convex curvature must be positive")
        else:
            if np.any(d2 >= 0.0):
                issues.append("quad_concave curvature must be negative")

        # finite-difference audit of the analytic derivatives; endpoints
        # are skipped because the central stencil would leave the domain,
        # and h shrinks near the edges to keep the stencil central.
        inner = grid[1:-1]
        h = 1e-5 * np.maximum(1.0, np.abs(inner))
        h = np.minimum(h, np.minimum(inner, self.a_max - inner))
        hi = inner + h
        lo = inner - h
        fd1 = (self.price(hi, b) - self.price(lo, b)) / (hi - lo)
        fd2 = (np.asarray(self.dprice_dA(hi))
               - np.asarray(self.dprice_dA(lo))) / (hi - lo)
        rel1 = float(np.max(np.abs(fd1 - d1[1:-1])
                            / np.maximum(1.0, np.abs(d1[1:-1]))))
        rel2 = float(np.max(np.abs(fd2 - d2[1:-1])
                            / np.maximum(1.0, np.abs(d2[1:-1]))))
        if rel1 > 1e-6:
            issues.append(f"slope disagrees with finite differences "
                          f"(worst rel err {rel1:.3g})")
        if rel2 > 1e-6:
            issues.append(f"curvature disagrees with finite differences "
                          f"(worst rel err {rel2:.3g})")

        return ValidationReport(ok=not issues, issues=tuple(issues),
                                fd_slope_err=rel1, fd_curvature_err=rel2,
                                grid_n=grid_n, b=b)

    # -- misc -----------------------------------------------------------

    def params(self) -> dict[str, float]:
        """The family-relevant parameters as a flat dict (for reports)."""
        if self.family is Family.LINEAR:
            return {"c": self.c, "m": self.m}
        if self.family is Family.EXP_CONVEX:
            return {"c": self.c, "alpha": self.alpha}
        return {"c": self.c, "m": self.m, "kappa": self.kappa}

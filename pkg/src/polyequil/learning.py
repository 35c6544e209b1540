"""Nearest-point learning dynamics and mixture resolutions.

Here producers know the demand curve only at supply levels they have
actually lived through.  Given a history of observed points, next
period's supply solves the same forecast-minus-penalty equation as
:mod:`polyequil.polyeq` (first-order forecast, unit quadratic penalty),
but expanded around the *historical point nearest the outcome*.  That
self-reference makes a step valid only if the point used for the
expansion really is the nearest one to the supply it produces; the solver
therefore tries expansion points from the most recent backwards and keeps
the first self-consistent one.

Each expansion point yields a quadratic in the deviation
``eps = A_next - A_star``::

    eps**2 + (1 - slope(A_star))*eps + (A_star - price(A_star, b)) = 0

with a plus and a minus root.  A :class:`RootPolicy` decides which root
is realized each period.  For a convex (or linear) curve the plus-root
map has two useful exact properties: the fixed point of the market is
also a fixed point of the map, and the map's derivative vanishes there —
so plus-root learning converges fast and monotonically from below.

When no expansion point is self-consistent, or when the outcome is
exactly equidistant from two historical points, the population can split:
a fraction ``psi`` expands around one point and ``1 - psi`` around the
other, and ``psi`` adjusts until the realized aggregate is equally far
from both.  :func:`mixture_equilibrium` computes that split in closed
form (the aggregate solves a single quadratic whose coefficients are
``psi``-weighted moments of the two expansion points).  Strictly
flip-flopping pairs turn out not to exist for these demand families —
the reflection ``a -> 2*plus_root(a) - a`` is distance-preserving only
up to the curve's third derivative, which has the wrong sign throughout —
so the pairs that matter in practice are exact ties, which
:func:`find_cycling_pair` locates by scanning reflected pairs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .demand import DemandSpec
from .errors import (ArgError, ComplexError, ComplexRootError,
                     ExistenceError)
from .polyeq import Branch
from .ree import solve_ree

__all__ = ["RootPolicy", "StepRecord", "LearningTrace",
           "MixtureEquilibrium", "policy_root", "step", "simulate",
           "mixture_equilibrium", "find_cycling_pair"]

_TIE_BAND = 1e-12


@dataclass(frozen=True)
class RootPolicy:
    """Per-period choice between the plus and minus root.

    ``kind`` is one of ``plus``, ``minus``, ``alternate`` (plus on the
    first realized step, then strictly alternating), or ``random`` (a
    draw per step, deterministic in ``(seed, step index)`` so traces
    replay bit-for-bit).  Parse the CLI form with :meth:`parse`:
    ``"random:7"`` is random with seed 7.
    """
    kind: str = "plus"
    seed: int = 0

    _KINDS = ("plus", "minus", "alternate", "random")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ArgError(f"unknown root policy {self.kind!r}; expected "
                           f"one of {', '.join(self._KINDS)}")

    @classmethod
    def parse(cls, text: str) -> "RootPolicy":
        if text.startswith("random:"):
            _, _, seed_text = text.partition(":")
            try:
                return cls("random", int(seed_text))
            except ValueError:
                raise ArgError(
                    f"bad random policy seed {seed_text!r}") from None
        return cls(text)

    def choose(self, k: int) -> Branch:
        """Root used on the k-th realized step (k counts from 0)."""
        if self.kind == "plus":
            return Branch.PLUS
        if self.kind == "minus":
            return Branch.MINUS
        if self.kind == "alternate":
            return Branch.PLUS if k % 2 == 0 else Branch.MINUS
        draw = random.Random(1_000_003 * self.seed + k).random()
        return Branch.PLUS if draw < 0.5 else Branch.MINUS

    def __str__(self) -> str:
        return f"random:{self.seed}" if self.kind == "random" else self.kind


@dataclass(frozen=True)
class StepRecord:
    """One realized learning step.

    ``a_star`` is the expansion point actually used, ``a_next`` the
    realized supply, ``residual`` the absolute defect of the expansion
    quadratic at the realized supply (or of the mixture aggregate
    equation when ``root_used == "mixture"``).
    """
    t: int
    a_star: float
    a_next: float
    forecast_price: float
    true_price: float
    residual: float
    root_used: str
    tie: bool = False
    cycle: bool = False


@dataclass(frozen=True)
class LearningTrace:
    prior_mu: float
    b: float
    a0: float
    steps: tuple[StepRecord, ...]
    converged: bool
    final_gap: float


def policy_root(spec: DemandSpec, b: float, a_star: float,
                branch: Branch | str = Branch.PLUS) -> float:
    """Supply solving the expansion quadratic around ``a_star``.

    Raises :class:`ComplexRootError` when the discriminant
    ``price(a_star) - a_star + ((1 - slope)/2)**2`` is negative, i.e.
    when ``a_star`` overshoots the curve by more than a quarter of the
    squared slope gap.
    """
    branch = Branch(branch)
    if branch is Branch.ZERO:
        raise ArgError("branch must be 'plus' or 'minus'")
    price_s = float(spec.price(a_star, b, check=False))
    slope_s = float(spec.dprice_dA(a_star, check=False))
    half = (1.0 - slope_s) / 2.0
    disc = (price_s - a_star) + half * half
    if disc < 0.0:
        raise ComplexRootError(
            f"no real step from a_star={a_star}: discriminant {disc:.6g}")
    dev = math.sqrt(disc)
    return a_star - half + (dev if branch is Branch.PLUS else -dev)


def _step_defect(spec: DemandSpec, b: float, a_star: float,
                 a_next: float) -> float:
    eps = a_next - a_star
    price_s = float(spec.price(a_star, b, check=False))
    slope_s = float(spec.dprice_dA(a_star, check=False))
    return abs(eps * eps + (1.0 - slope_s) * eps + (a_star - price_s))


def _nearest(known: list[float], x: float) -> tuple[int, int | None]:
    """Index of the known point nearest ``x``; second index on an exact tie.

    Ties are judged with an absolute band of ``1e-12`` on the distance
    difference; only ties between *distinct* points count (a history can
    legitimately revisit the same supply).
    """
    dists = [abs(x - a) for a in known]
    best = min(range(len(known)), key=lambda i: (dists[i], i))
    for i, d in enumerate(dists):
        if i != best and abs(d - dists[best]) <= _TIE_BAND \
                and abs(known[i] - known[best]) > _TIE_BAND:
            return best, i
    return best, None


def step(spec: DemandSpec, b: float, known: list[float],
         policy: RootPolicy = RootPolicy(), k: int = 0,
         t: int | None = None) -> StepRecord:
    """Realize one supply from a history of observed points.

    Tries expansion points from the most recent backwards; accepts the
    first whose policy root lands nearest that same point.  An exact
    nearest-point tie, or a history where every expansion point is
    contradicted by its own outcome, is resolved by
    :func:`mixture_equilibrium` on the offending pair.  If every
    expansion point's quadratic is complex, :class:`ComplexRootError`
    is raised.

    ``k`` indexes the realized step for the policy; ``t`` is the period
    stamp for the record (defaults to ``k + 1``).
    """
    if not known:
        raise ArgError("need at least one observed point")
    t = k + 1 if t is None else t
    branch = policy.choose(k)
    complex_msg: str | None = None
    first_conflict: tuple[float, float] | None = None

    for idx in range(len(known) - 1, -1, -1):
        a_s = known[idx]
        try:
            root = policy_root(spec, b, a_s, branch)
        except ComplexRootError as e:
            complex_msg = str(e)
            continue
        best, tie_idx = _nearest(known, root)
        if tie_idx is not None:
            if known[best] == a_s or known[tie_idx] == a_s:
                other = known[tie_idx] if known[best] == a_s else known[best]
                return _mixture_step(spec, b, a_s, other, t, tie=True)
            # a tie between two *other* points still contradicts a_s
        elif known[best] == a_s:
            forecast = (float(spec.price(a_s, b, check=False))
                        + float(spec.dprice_dA(a_s, check=False))
                        * (root - a_s))
            return StepRecord(
                t=t, a_star=a_s, a_next=root, forecast_price=forecast,
                true_price=float(spec.price(root, b, check=False)),
                residual=_step_defect(spec, b, a_s, root),
                root_used=branch.value)
        if first_conflict is None:
            first_conflict = (a_s, known[best])

    if first_conflict is None:
        raise ComplexRootError(
            "every expansion point steps into the complex plane; last "
            f"failure: {complex_msg}")
    a_s, rival = first_conflict
    return _mixture_step(spec, b, a_s, rival, t, cycle=True)


def _mixture_step(spec: DemandSpec, b: float, a_star: float, other: float,
                  t: int, tie: bool = False,
                  cycle: bool = False) -> StepRecord:
    mix = mixture_equilibrium(spec, b, a_star, other)
    agg = mix.A_bar
    w1, w2 = mix.psi, 1.0 - mix.psi
    f1 = (float(spec.price(a_star, b, check=False))
          + float(spec.dprice_dA(a_star, check=False)) * (agg - a_star))
    f2 = (float(spec.price(other, b, check=False))
          + float(spec.dprice_dA(other, check=False)) * (agg - other))
    return StepRecord(
        t=t, a_star=a_star, a_next=agg,
        forecast_price=w1 * f1 + w2 * f2,
        true_price=float(spec.price(agg, b, check=False)),
        residual=mix.residual, root_used="mixture", tie=tie, cycle=cycle)


def simulate(spec: DemandSpec, b: float, prior_mu: float,
             policy: RootPolicy = RootPolicy(), t_max: int = 200,
             tol: float = 1e-10) -> LearningTrace:
    """Iterate :func:`step` from a single prior observation.

    Convergence is declared when the realized supply prices at itself
    within ``tol``.  A prior that already does so produces a one-record
    trace stamped ``t = 0`` and no realized steps.  ``final_gap`` is the
    distance of the last supply from the frictionless fixed point (which
    is solved internally for reference).
    """
    if t_max < 1:
        raise ArgError(f"t_max must be at least 1, got {t_max}")
    if not tol > 0:
        raise ArgError(f"tol must be positive, got {tol}")
    a0 = solve_ree(spec, b).A0
    gap0 = abs(prior_mu - float(spec.price(prior_mu, b)))
    if gap0 <= tol:
        rec = StepRecord(t=0, a_star=prior_mu, a_next=prior_mu,
                         forecast_price=float(spec.price(prior_mu, b)),
                         true_price=float(spec.price(prior_mu, b)),
                         residual=_step_defect(spec, b, prior_mu, prior_mu),
                         root_used="none")
        return LearningTrace(prior_mu=prior_mu, b=b, a0=a0, steps=(rec,),
                             converged=True,
                             final_gap=abs(prior_mu - a0))

    known = [prior_mu]
    steps: list[StepRecord] = []
    converged = False
    for k in range(t_max):
        rec = step(spec, b, known, policy, k)
        known.append(rec.a_next)
        steps.append(rec)
        if abs(rec.a_next - float(spec.price(rec.a_next, b,
                                             check=False))) <= tol:
            converged = True
            break
    return LearningTrace(prior_mu=prior_mu, b=b, a0=a0, steps=tuple(steps),
                         converged=converged,
                         final_gap=abs(known[-1] - a0))


# --------------------------------------------------------------------------
# mixtures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MixtureEquilibrium:
    """A population split between two expansion points.

    ``psi`` is the fraction expanding around ``a_star``; the realized
    aggregate ``A_bar`` is equally distant from both points.  ``p`` and
    ``q`` are the coefficients of the aggregate's quadratic
    ``A**2 + p*A + q = 0`` at the returned ``psi``; ``residual`` is how
    far the quadratic's positive root is from ``A_bar``.  ``degenerate``
    marks the vacuous case ``a_star == a_star2``.
    """
    psi: float
    A_bar: float
    a_star: float
    a_star2: float
    p: float
    q: float
    residual: float
    degenerate: bool = False


def _mixture_coeffs(spec: DemandSpec, b: float, a1: float, a2: float,
                    psi: float) -> tuple[float, float]:
    """Coefficients of ``A**2 + p*A + q = 0`` for the split aggregate.

    Each group supplies its first-order forecast net of the squared
    deviation from its own point; weighting by ``psi`` and collecting
    powers of ``A`` gives ``p`` and ``q`` as weighted moments.
    """
    p1, p2 = (float(spec.price(a1, b, check=False)),
              float(spec.price(a2, b, check=False)))
    d1, d2 = (float(spec.dprice_dA(a1, check=False)),
              float(spec.dprice_dA(a2, check=False)))
    w2 = 1.0 - psi
    s_d = psi * d1 + w2 * d2
    s_a = psi * a1 + w2 * a2
    s_da = psi * d1 * a1 + w2 * d2 * a2
    s_a2 = psi * a1 * a1 + w2 * a2 * a2
    s_p = psi * p1 + w2 * p2
    return 1.0 - s_d - 2.0 * s_a, s_da + s_a2 - s_p


def _positive_root(p: float, q: float) -> float:
    """Larger root of ``A**2 + p*A + q = 0``; complex input raises."""
    disc = 0.25 * p * p - q
    if disc < 0.0:
        raise ComplexError(
            f"mixture aggregate is complex: p={p:.6g}, q={q:.6g}")
    return -0.5 * p + math.sqrt(disc)


def mixture_equilibrium(spec: DemandSpec, b: float, a_star: float,
                        a_star2: float, band: float = 1e-9,
                        tol: float = 1e-10) -> MixtureEquilibrium:
    """Split weight making the aggregate equidistant from two points.

    Preconditions (checked with tolerance ``band`` on the distance
    defects): the plus root from each point must land at least as close
    to the *other* point — the configuration in which neither pure
    expansion is self-consistent.  :class:`ExistenceError` reports the
    defects when this fails, and also when the aggregate never crosses
    the midpoint as ``psi`` runs over [0, 1].  When the aggregate sits on
    the midpoint for *every* ``psi`` (exact-tie pairs do this), the
    indifferent split ``psi = 0.5`` is returned.
    """
    if abs(a_star - a_star2) <= _TIE_BAND:
        p, q = _mixture_coeffs(spec, b, a_star, a_star2, 0.5)
        return MixtureEquilibrium(psi=0.5, A_bar=a_star, a_star=a_star,
                                  a_star2=a_star2, p=p, q=q, residual=0.0,
                                  degenerate=True)

    f1 = policy_root(spec, b, a_star, Branch.PLUS)
    f2 = policy_root(spec, b, a_star2, Branch.PLUS)
    defect1 = abs(f1 - a_star) - abs(f1 - a_star2)
    defect2 = abs(f2 - a_star2) - abs(f2 - a_star)
    if defect1 < -band or defect2 < -band:
        raise ExistenceError(
            "not a flip-flopping pair: the pure expansion roots are "
            f"self-consistent (defects {defect1:.3g}, {defect2:.3g}, "
            f"band {band:g})")

    a_bar = 0.5 * (a_star + a_star2)

    def h(psi: float) -> float:
        return _positive_root(*_mixture_coeffs(spec, b, a_star, a_star2,
                                               psi)) - a_bar

    h0, h1 = h(0.0), h(1.0)
    if abs(h0) <= tol and abs(h1) <= tol:
        psi = 0.5  # indifferent: every split already hits the midpoint
    elif (h0 < 0.0) == (h1 < 0.0):
        raise ExistenceError(
            "the aggregate never crosses the midpoint of the pair "
            f"(h(0)={h0:.3g}, h(1)={h1:.3g})")
    else:
        lo, hi = 0.0, 1.0
        glo = h0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = h(mid)
            if (gm < 0.0) == (glo < 0.0):
                lo, glo = mid, gm
            else:
                hi = mid
            if hi - lo <= 1e-15:
                break
        psi = 0.5 * (lo + hi)

    p, q = _mixture_coeffs(spec, b, a_star, a_star2, psi)
    return MixtureEquilibrium(psi=psi, A_bar=a_bar, a_star=a_star,
                              a_star2=a_star2, p=p, q=q,
                              residual=abs(_positive_root(p, q) - a_bar))


def find_cycling_pair(spec: DemandSpec, b: float, grid_n: int = 80,
                      band: float = 1e-9) -> tuple[float, float]:
    """Scan for a pair on which :func:`mixture_equilibrium` is live.

    Walks candidate first points across the domain and reflects each
    through its plus root (``other = 2*root - first``), which makes the
    root exactly equidistant by construction; keeps the first pair that
    is honestly nondegenerate, stays in the domain, satisfies the
    flip-flop precondition within ``band``, and admits a positive
    aggregate root across the whole ``psi`` range.  Strictly convex
    curves admit no such pair — their reflection shortens the return
    distance — so this raises :class:`ExistenceError` for them; linear
    and quadratic curves, whose reflection is exact, yield pairs
    readily.
    """
    a0 = solve_ree(spec, b).A0
    lo_dom, hi_dom = spec.domain
    for frac in range(1, grid_n):
        first = lo_dom + (hi_dom - lo_dom) * frac / grid_n
        if abs(first - a0) <= 1e-6:
            continue
        try:
            root = policy_root(spec, b, first, Branch.PLUS)
        except ComplexRootError:
            continue
        other = 2.0 * root - first
        if not (lo_dom < other < hi_dom) or abs(other - first) <= 1e-6:
            continue
        try:
            root2 = policy_root(spec, b, other, Branch.PLUS)
        except ComplexRootError:
            continue
        if abs(root2 - other) - abs(root2 - first) < -band:
            continue
        if any(_mixture_coeffs(spec, b, first, other, psi)[1] >= 0.0
               for psi in (0.0, 0.25, 0.5, 0.75, 1.0)):
            continue
        try:
            mixture_equilibrium(spec, b, first, other, band=band)
        except (ExistenceError, ComplexError):
            continue
        return (first, other)
    raise ExistenceError(
        "no flip-flopping pair on this curve: reflection through the "
        "plus root strictly contracts for strictly convex demand, so "
        "only curves with vanishing third derivative (linear or "
        "quadratic) produce the exact ties a mixture needs")

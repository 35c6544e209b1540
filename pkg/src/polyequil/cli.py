"""Batch front end: scenario files in, deterministic CSV out.

A scenario file is line-oriented ``section.key = value`` with ``#``
comments, e.g.::

    # two-root structure across the penalty range
    demand.family = linear
    demand.c = 1.0
    demand.m = 0.5
    solver.variant = first_order
    solver.b0 = 1.0
    sweep.parameter = tau
    sweep.lo = 0.5
    sweep.hi = 2.0
    sweep.steps = 4
    output.path = out/first_order_tau.csv

Sections are ``demand``, ``solver``, ``sweep`` and ``output``; unknown
sections or keys are rejected (exit code 2).  Every emitted CSV carries a
trailing ``# config:`` comment with the fully resolved demand and solver
parameters, which is what ``verify`` uses to rebuild the problem and
recheck every row against its defining equation from scratch.

Numbers are printed with 17 significant digits, cells that do not apply
to a row are left empty, and nothing run-dependent is written, so the
same scenario always produces byte-identical output.  Exit codes: 0 ok,
2 configuration problem, 3 a solver failed, 4 a verification or
invariant check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import oracle
from .asyminfo import (PointMass, PopulationSpec, TruncatedGaussian,
                       Uniform, agent_supply, aggregate, simpson)
from .demand import DemandSpec, Family
from .errors import ArgError, ConfigError, ExistenceError, PolyequilError
from .learning import RootPolicy, simulate
from .polyeq import (Branch, alt_discount_equilibria,
                     first_order_equilibria, parameter_change_equilibria,
                     regime_bound, second_order_equilibria)
from .ree import ree_multiplier, solve_ree

__all__ = ["main", "load_scenario", "parse_scenario", "Scenario"]

_VARIANTS = ("ree", "first_order", "param_change", "second_order",
             "alt_discount", "bounds", "learn", "asyminfo")
_SWEEPABLE = {
    "tau": {"first_order", "second_order"},
    "delta_b": {"param_change", "alt_discount"},
    "tau2": {"param_change"},
    "prior_mu": {"learn"},
}
_SECTION_KEYS = {
    "demand": {"family", "c", "m", "alpha", "kappa", "a_max", "b_ref"},
    "solver": {"variant", "b0", "tau", "tau1", "tau2", "tau3", "delta_b",
               "tol", "prior_mu", "policy", "t_max", "density", "branch",
               "quad_n", "seed"},
    "sweep": {"parameter", "lo", "hi", "steps"},
    "output": {"path"},
}

# Column layouts.  The ree and polyeq lists are part of the public file
# format; learn and asyminfo emit per-step/per-node rows before a single
# summary row (kind/root_used tells them apart).
_POLYEQ_VARIANTS = ("first_order", "param_change", "second_order",
                    "alt_discount", "bounds")
_COLUMNS = {
    "ree": ["b", "A0", "P0", "multiplier", "residual", "iterations"],
    "polyeq": ["variant", "delta_b", "tau1", "tau2", "tau3", "branch",
               "delta_A", "A", "forecast_price", "true_price", "residual",
               "regime", "valid", "reason"],
    "learn": ["prior_mu", "t", "a_star", "a_next", "forecast_price",
              "true_price", "residual", "root_used", "tie", "cycle",
              "converged", "final_gap", "valid", "reason"],
    "asyminfo": ["kind", "node", "forecast", "supply", "aggregate_A",
                 "A0", "below_ree", "quad_error_est", "valid", "reason"],
}

_NAN = float("nan")


def _schema_for(variant: str) -> str:
    return "polyeq" if variant in _POLYEQ_VARIANTS else variant


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (Family, Branch)):
        return v.value
    return str(v)


# --------------------------------------------------------------------------
# scenario files
# --------------------------------------------------------------------------

@dataclass
class Scenario:
    demand: DemandSpec
    solver: dict[str, str]
    sweep: dict[str, str] | None
    output_path: str | None


def _parse_pairs(text: str, origin: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'section.key "
                              f"= value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if "." not in key:
            raise ConfigError(f"{origin}:{lineno}: key {key!r} is missing "
                              "its section prefix")
        section, _, name = key.partition(".")
        if section not in _SECTION_KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown section "
                              f"{section!r}")
        if name not in _SECTION_KEYS[section]:
            raise ConfigError(f"{origin}:{lineno}: unknown key {name!r} in "
                              f"section {section!r}")
        if not value:
            raise ConfigError(f"{origin}:{lineno}: empty value for {key!r}")
        sections.setdefault(section, {})[name] = value
    return sections


def _as_float(d: dict[str, str], key: str, origin: str) -> float:
    try:
        return float(d[key])
    except (KeyError, ValueError):
        raise ConfigError(
            f"{origin}: {key} must be a number, got "
            f"{d.get(key, '<missing>')!r}") from None


def _build_demand(d: dict[str, str], origin: str) -> DemandSpec:
    try:
        family = Family(d.get("family", ""))
    except ValueError:
        raise ConfigError(
            f"{origin}: demand.family must be one of "
            f"{', '.join(f.value for f in Family)}, got "
            f"{d.get('family', '<missing>')!r}") from None
    a_max = _as_float(d, "a_max", origin) if "a_max" in d else None
    b_ref = _as_float(d, "b_ref", origin) if "b_ref" in d else 0.0
    c = _as_float(d, "c", origin)
    if family is Family.LINEAR:
        return DemandSpec.linear(c, _as_float(d, "m", origin),
                                 a_max=a_max, b_ref=b_ref)
    if family is Family.EXP_CONVEX:
        return DemandSpec.exp_convex(c, _as_float(d, "alpha", origin),
                                     a_max=a_max, b_ref=b_ref)
    return DemandSpec.quad_concave(c, _as_float(d, "m", origin),
                                   _as_float(d, "kappa", origin),
                                   a_max=a_max, b_ref=b_ref)


def parse_scenario(text: str, origin: str = "<scenario>") -> Scenario:
    sections = _parse_pairs(text, origin)
    if "demand" not in sections:
        raise ConfigError(f"{origin}: missing demand section")
    demand = _build_demand(sections["demand"], origin)
    solver = sections.get("solver", {})
    if "variant" in solver and solver["variant"] not in _VARIANTS:
        raise ConfigError(f"{origin}: unknown solver.variant "
                          f"{solver['variant']!r}; expected one of "
                          f"{', '.join(_VARIANTS)}")
    sweep = sections.get("sweep")
    if sweep is not None:
        missing = {"parameter", "lo", "hi", "steps"} - set(sweep)
        if missing:
            raise ConfigError(f"{origin}: sweep section is missing "
                              f"{', '.join(sorted(missing))}")
        if sweep["parameter"] not in _SWEEPABLE:
            raise ConfigError(
                f"{origin}: sweep.parameter must be one of "
                f"{', '.join(sorted(_SWEEPABLE))}, got "
                f"{sweep['parameter']!r}")
    output = sections.get("output", {})
    return Scenario(demand=demand, solver=solver, sweep=sweep,
                    output_path=output.get("path"))


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read scenario {p}: {e}") from None
    return parse_scenario(text, origin=str(p))


def _config_comment(scenario: Scenario, variant: str) -> str:
    spec = scenario.demand
    pairs: list[tuple[str, str]] = [("demand.family", spec.family.value)]
    pairs += [(f"demand.{k}", _fmt(v)) for k, v in spec.params().items()]
    pairs.append(("demand.a_max", _fmt(spec.a_max)))
    pairs.append(("solver.variant", variant))
    for key in sorted(scenario.solver):
        if key != "variant":
            pairs.append((f"solver.{key}", scenario.solver[key]))
    if scenario.sweep is not None:
        for key in ("parameter", "lo", "hi", "steps"):
            pairs.append((f"sweep.{key}", scenario.sweep[key]))
    return "# config: " + " ".join(f"{k}={v}" for k, v in pairs)


# --------------------------------------------------------------------------
# solver-side value resolution
# --------------------------------------------------------------------------

def _solver_float(sv: dict[str, str], key: str, default: float | None = None,
                  ) -> float:
    if key not in sv:
        if default is None:
            raise ConfigError(f"solver.{key} is required for this command")
        return default
    try:
        return float(sv[key])
    except ValueError:
        raise ConfigError(f"solver.{key} must be a number, got "
                          f"{sv[key]!r}") from None


def _solver_int(sv: dict[str, str], key: str, default: int) -> int:
    if key not in sv:
        return default
    try:
        return int(sv[key])
    except ValueError:
        raise ConfigError(f"solver.{key} must be an integer, got "
                          f"{sv[key]!r}") from None


def _parse_density(text: str, quad_n: int) -> PopulationSpec:
    kind, _, rest = text.partition(":")
    parts = rest.split(",") if rest else []
    try:
        if kind == "uniform" and len(parts) == 2:
            return PopulationSpec(Uniform(float(parts[0]), float(parts[1])),
                                  quad_n)
        if kind == "gauss" and len(parts) == 4:
            return PopulationSpec(
                TruncatedGaussian(float(parts[0]), float(parts[1]),
                                  float(parts[2]), float(parts[3])), quad_n)
        if kind == "point" and len(parts) == 1:
            return PopulationSpec(PointMass(float(parts[0])), quad_n)
    except ValueError as e:
        raise ConfigError(f"bad density {text!r}: {e}") from None
    raise ConfigError(
        f"bad density {text!r}; expected uniform:lo,hi or "
        "gauss:mean,sd,lo,hi or point:at")


def _policy_from(sv: dict[str, str], seed: int | None) -> RootPolicy:
    text = sv.get("policy", "plus")
    try:
        if text == "random":
            return RootPolicy("random", seed if seed is not None
                              else _solver_int(sv, "seed", 0))
        return RootPolicy.parse(text)
    except ArgError as e:
        raise ConfigError(str(e)) from None


# --------------------------------------------------------------------------
# row builders
# --------------------------------------------------------------------------

def _ree_rows(spec: DemandSpec, sv: dict[str, str], tol: float) -> list[list]:
    b = _solver_float(sv, "b0", 0.0)
    point = solve_ree(spec, b, tol=tol)
    mult = ree_multiplier(spec, b, tol=tol)
    return [[b, point.A0, point.P0, mult, point.residual, point.iterations]]


def _equilibrium_cells(r) -> list:
    return [r.branch.value, r.delta_A, r.A, r.forecast_price, r.true_price,
            r.residual, r.regime.value, r.valid, r.reason]


def _polyeq_rows(variant: str, spec: DemandSpec, sv: dict[str, str],
                 tol: float) -> list[list]:
    b0 = _solver_float(sv, "b0", 0.0)
    a0 = solve_ree(spec, b0, tol=tol).A0
    if variant == "bounds":
        return _bounds_rows(spec, sv, a0, b0)
    if variant == "first_order":
        tau = _solver_float(sv, "tau")
        records = first_order_equilibria(spec, a0, tau, b0=b0)
        lead = [variant, 0.0, tau, 0.0, 0.0]
    elif variant == "param_change":
        t1 = _solver_float(sv, "tau1")
        t2 = _solver_float(sv, "tau2", 0.0)
        t3 = _solver_float(sv, "tau3", 0.0)
        db = _solver_float(sv, "delta_b", 0.0)
        records = parameter_change_equilibria(spec, a0, b0, db, t1, t2, t3)
        lead = [variant, db, t1, t2, t3]
    elif variant == "second_order":
        tau = _solver_float(sv, "tau")
        records = second_order_equilibria(spec, a0, tau, b0=b0)
        lead = [variant, 0.0, tau, 0.0, 0.0]
    else:
        db = _solver_float(sv, "delta_b", 0.0)
        records = alt_discount_equilibria(spec, a0, b0, db)
        lead = [variant, db, 0.0, 0.0, 0.0]
    return [lead + _equilibrium_cells(r) for r in records]


def _polyeq_error_row(variant: str, sv: dict[str, str],
                      exc: Exception) -> list:
    db = _solver_float(sv, "delta_b", 0.0)
    t1 = _solver_float(sv, "tau1", _solver_float(sv, "tau", _NAN))
    t2 = _solver_float(sv, "tau2", 0.0)
    t3 = _solver_float(sv, "tau3", 0.0)
    return [variant, db, t1, t2, t3, "", _NAN, _NAN, _NAN, _NAN, _NAN, "",
            False, f"{type(exc).__name__}: {exc}"]


def _bounds_rows(spec: DemandSpec, sv: dict[str, str], a0: float,
                 b0: float) -> list[list]:
    """Regime-boundary rows in the shared equilibrium layout.

    Each root's row records the boundary shift in ``delta_b`` and the
    deviation whose magnitude equals it in ``delta_A``; a missing upper
    bound becomes an invalid row rather than a failure.
    """
    price0 = float(spec.price(a0, b0))
    slope = float(spec.dprice_dA(a0))
    shift = float(spec.dprice_db(a0))
    half = (1.0 - slope) / 2.0
    rows: list[list] = []
    for root, sign in ((Branch.MINUS, -1.0), (Branch.PLUS, +1.0)):
        try:
            bound = regime_bound(spec, a0, b0, root)
        except ExistenceError as e:
            rows.append(["bounds", _NAN, 0.0, 0.0, 0.0, root.value, _NAN,
                         _NAN, _NAN, _NAN, _NAN, "", False,
                         f"ExistenceError: {e}"])
            continue
        da = -half + sign * math.sqrt(shift * bound + half * half)
        a = a0 + da
        forecast = price0 + slope * da + shift * bound
        true_price = float(spec.price(a, b0 + bound, check=False))
        residual = oracle.residual("worstcase_r2", da,
                                   {"slope": slope, "shift_slope": shift,
                                    "delta_b": bound})
        regime = "elevated" if da > 0 else "depressed"
        rows.append(["bounds", bound, 0.0, 0.0, 0.0, root.value, da, a,
                     forecast, true_price, residual, regime, True,
                     "regime boundary |delta_A| = delta_b"])
    return rows


def _learn_rows(spec: DemandSpec, sv: dict[str, str], tol: float,
                seed: int | None) -> list[list]:
    b0 = _solver_float(sv, "b0", 0.0)
    prior = _solver_float(sv, "prior_mu")
    policy = _policy_from(sv, seed)
    t_max = _solver_int(sv, "t_max", 200)
    trace = simulate(spec, b0, prior, policy=policy, t_max=t_max, tol=tol)
    rows = [[prior, r.t, r.a_star, r.a_next, r.forecast_price,
             r.true_price, r.residual, r.root_used, r.tie, r.cycle, None,
             None, True, ""]
            for r in trace.steps]
    last = trace.steps[-1].a_next if trace.steps else prior
    rows.append([prior, len(trace.steps), None, last, None, None, None,
                 "summary", None, None, trace.converged, trace.final_gap,
                 True, ""])
    return rows


def _learn_error_row(sv: dict[str, str], exc: Exception) -> list:
    return [_solver_float(sv, "prior_mu", _NAN), 0, None, None, None, None,
            None, "error", None, None, False, _NAN, False,
            f"{type(exc).__name__}: {exc}"]


def _asyminfo_rows(spec: DemandSpec, sv: dict[str, str],
                   tol: float) -> list[list]:
    b0 = _solver_float(sv, "b0", 0.0)
    if "density" not in sv:
        raise ConfigError("solver.density is required for asyminfo")
    pop = _parse_density(sv["density"], _solver_int(sv, "quad_n", 2001))
    branch = sv.get("branch", "plus")
    if branch not in ("plus", "minus"):
        raise ConfigError(f"solver.branch must be plus or minus, got "
                          f"{branch!r}")
    eq = aggregate(spec, b0, pop, branch)
    rows = [["node", node, f, s, None, None, None, None, True, ""]
            for node, f, s in eq.agent_curve]
    rows.append(["summary", None, None, None, eq.aggregate_A, eq.a0,
                 eq.below_ree, eq.quad_error_est, True, ""])
    return rows


def _variant_rows(variant: str, spec: DemandSpec, sv: dict[str, str],
                  tol: float, seed: int | None) -> list[list]:
    if variant == "ree":
        return _ree_rows(spec, sv, tol)
    if variant in _POLYEQ_VARIANTS:
        return _polyeq_rows(variant, spec, sv, tol)
    if variant == "learn":
        return _learn_rows(spec, sv, tol, seed)
    if variant == "asyminfo":
        return _asyminfo_rows(spec, sv, tol)
    raise ConfigError(f"unknown variant {variant!r}")


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _render_csv(variant: str, rows: list[list], comment: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_COLUMNS[_schema_for(variant)])
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    buf.write(comment + "\n")
    return buf.getvalue()


def _emit(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _resolve_tol(args, sv: dict[str, str], default: float) -> float:
    if getattr(args, "tol", None) is not None:
        return args.tol
    if "tol" in sv:
        return _solver_float(sv, "tol")
    return default


def _apply_overrides(sv: dict[str, str], args,
                     mapping: dict[str, str]) -> dict[str, str]:
    sv = dict(sv)
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            sv[key] = str(value)
    return sv


def _check_variant(scenario: Scenario, expected: str, origin: str) -> None:
    declared = scenario.solver.get("variant")
    if declared is not None and declared != expected:
        raise ConfigError(
            f"{origin}: scenario declares solver.variant={declared!r} but "
            f"the command runs {expected!r}")


# --------------------------------------------------------------------------
# command handlers
# --------------------------------------------------------------------------

def _run_single(args, variant: str, overrides: dict[str, str],
                default_tol: float) -> int:
    scenario = load_scenario(args.config)
    _check_variant(scenario, variant, str(args.config))
    sv = _apply_overrides(scenario.solver, args, overrides)
    tol = _resolve_tol(args, sv, default_tol)
    sv["tol"] = _fmt(tol)
    seed = getattr(args, "seed", None)
    scenario.solver = sv
    rows = _variant_rows(variant, scenario.demand, sv, tol, seed)
    out = args.out if args.out is not None else scenario.output_path
    _emit(out, _render_csv(variant, rows, _config_comment(scenario,
                                                          variant)))
    return 0


def _cmd_ree(args) -> int:
    return _run_single(args, "ree", {}, 1e-12)


def _cmd_polyeq(args) -> int:
    variant = args.polyeq_variant.replace("-", "_")
    overrides = {"tau": "tau", "tau1": "tau1", "tau2": "tau2",
                 "tau3": "tau3", "delta_b": "delta_b"}
    return _run_single(args, variant, overrides, 1e-12)


def _cmd_learn(args) -> int:
    return _run_single(args, "learn",
                       {"prior": "prior_mu", "policy": "policy",
                        "tmax": "t_max"}, 1e-10)


def _cmd_asyminfo(args) -> int:
    return _run_single(args, "asyminfo",
                       {"density": "density", "branch": "branch",
                        "quad_n": "quad_n"}, 1e-12)


def _cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    if scenario.sweep is None:
        raise ConfigError(f"{args.scenario}: sweep command needs a sweep "
                          "section")
    variant = scenario.solver.get("variant")
    if variant is None:
        raise ConfigError(f"{args.scenario}: sweep needs solver.variant")
    parameter = scenario.sweep["parameter"]
    if variant not in _SWEEPABLE[parameter]:
        raise ConfigError(
            f"{args.scenario}: sweep.parameter={parameter!r} does not "
            f"apply to variant {variant!r} (allowed: "
            f"{', '.join(sorted(_SWEEPABLE[parameter]))})")
    lo = _as_float(scenario.sweep, "lo", str(args.scenario))
    hi = _as_float(scenario.sweep, "hi", str(args.scenario))
    try:
        steps = int(scenario.sweep["steps"])
    except ValueError:
        raise ConfigError(f"{args.scenario}: sweep.steps must be an "
                          "integer") from None
    if steps < 1 or hi < lo:
        raise ConfigError(f"{args.scenario}: need steps >= 1 and hi >= lo")

    tol = _resolve_tol(args, scenario.solver,
                       1e-10 if variant == "learn" else 1e-12)
    scenario.solver["tol"] = _fmt(tol)
    seed = getattr(args, "seed", None)
    rows: list[list] = []
    for value in np.linspace(lo, hi, steps):
        sv = dict(scenario.solver)
        sv[parameter] = _fmt(float(value))
        try:
            rows.extend(_variant_rows(variant, scenario.demand, sv, tol,
                                      seed))
        except ConfigError:
            raise
        except PolyequilError as e:
            if variant == "learn":
                rows.append(_learn_error_row(sv, e))
            else:
                rows.append(_polyeq_error_row(variant, sv, e))
    out = args.out if args.out is not None else scenario.output_path
    _emit(out, _render_csv(variant, rows,
                           _config_comment(scenario, variant)))
    return 0


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

def _read_emitted(path: Path) -> tuple[list[str], list[list[str]], dict]:
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    config_line = next((ln for ln in reversed(lines)
                        if ln.startswith("# config: ")), None)
    if config_line is None:
        raise ConfigError(f"{path}: no trailing '# config:' comment; not "
                          "an emitted file?")
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        raise ConfigError(f"{path}: no header row")
    table = list(csv.reader(io.StringIO("\n".join(body))))
    header, data = table[0], table[1:]
    cfg: dict[str, dict[str, str]] = {}
    for pair in config_line[len("# config: "):].split(" "):
        key, _, value = pair.partition("=")
        section, _, name = key.partition(".")
        cfg.setdefault(section, {})[name] = value
    return header, data, cfg


def _verify_polyeq_row(spec, a0: float, row, col, vtol: float):
    """Return a problem string for one valid equilibrium row, or None."""
    def fval(name: str) -> float:
        return float(row[col[name]])

    variant = row[col["variant"]]
    da = fval("delta_A")
    if abs(fval("A") - (a0 + da)) > 1e-9:
        return "A does not equal a0 + delta_A"
    ctx = {"slope": float(spec.dprice_dA(a0)),
           "curvature": float(spec.d2price_dA2(a0)),
           "shift_slope": float(spec.dprice_db(a0))}
    if variant == "first_order":
        ctx["tau"] = fval("tau1")
        res = oracle.residual("first_order", da, ctx)
    elif variant == "second_order":
        ctx["tau"] = fval("tau1")
        res = oracle.residual("second_order", da, ctx)
    elif variant == "param_change":
        ctx.update(tau1=fval("tau1"), tau2=fval("tau2"), tau3=fval("tau3"),
                   delta_b=fval("delta_b"))
        res = oracle.residual("shift_up" if da >= 0.0 else "shift_down",
                              da, ctx)
    elif variant in ("alt_discount", "bounds"):
        ctx["delta_b"] = fval("delta_b")
        r1 = oracle.residual("worstcase_r1", da, ctx)
        r2 = oracle.residual("worstcase_r2", da, ctx)
        if variant == "bounds":
            if abs(abs(da) - ctx["delta_b"]) > 1e-7:
                return "bound row where |delta_A| != delta_b"
            res = r2
        elif abs(da) < ctx["delta_b"]:
            res = r1
        elif abs(da) > ctx["delta_b"]:
            res = r2
        else:
            res = min(r1, r2)
    else:
        return f"unknown variant cell {variant!r}"
    if res > max(vtol, 1e-10):
        return f"defining-equation residual {res:.3g} too large"
    return None


def _verify_file(path: Path, vtol: float) -> list[str]:
    header, data, cfg = _read_emitted(path)
    spec = _build_demand(cfg.get("demand", {}), str(path))
    solver = cfg.get("solver", {})
    variant = solver.get("variant")
    if variant not in _VARIANTS:
        raise ConfigError(f"{path}: config comment lacks a usable "
                          f"solver.variant (got {variant!r})")
    schema = _schema_for(variant)
    if header != _COLUMNS[schema]:
        raise ConfigError(f"{path}: header does not match the {schema} "
                          "schema")
    col = {name: i for i, name in enumerate(header)}
    b0 = _solver_float(solver, "b0", 0.0)
    problems: list[str] = []

    def complain(rownum: int, msg: str) -> None:
        problems.append(f"{path}:row {rownum}: {msg}")

    a0 = None
    if schema == "polyeq" and any(r[col["valid"]] == "true" for r in data):
        a0 = solve_ree(spec, b0).A0

    nodes: list[float] = []
    supplies: list[float] = []
    summary: list[str] | None = None
    for i, row in enumerate(data, start=2):
        if schema == "ree":
            a = float(row[col["A0"]])
            b = float(row[col["b"]])
            if abs(a - float(spec.price(a, b))) > max(vtol, 1e-12):
                complain(i, "fixed point fails its own equation")
            slope = float(spec.dprice_dA(a))
            want = float(spec.dprice_db(a)) / (1.0 - slope)
            if abs(float(row[col["multiplier"]]) - want) > 1e-9:
                complain(i, "multiplier does not match the pass-through "
                            "formula")
            continue
        if row[col["valid"]] != "true":
            continue
        if schema == "polyeq":
            msg = _verify_polyeq_row(spec, a0, row, col, vtol)
            if msg is not None:
                complain(i, msg)
        elif schema == "learn":
            used = row[col["root_used"]]
            if used in ("plus", "minus"):
                a_star = float(row[col["a_star"]])
                res = oracle.residual(
                    "learning_step", float(row[col["a_next"]]),
                    {"a_star": a_star,
                     "price_star": float(spec.price(a_star, b0,
                                                    check=False)),
                     "slope_star": float(spec.dprice_dA(a_star,
                                                        check=False))})
                if res > max(vtol, 1e-10):
                    complain(i, f"step-equation residual {res:.3g} too "
                                "large")
            elif used in ("mixture", "none"):
                gate = max(vtol, _solver_float(solver, "tol", vtol))
                if float(row[col["residual"]]) > gate:
                    complain(i, "recorded residual exceeds the tolerance")
        elif schema == "asyminfo":
            if row[col["kind"]] == "summary":
                summary = row
                continue
            node = float(row[col["node"]])
            res = oracle.residual(
                "agent_forecast", float(row[col["forecast"]]),
                {"a_i": node,
                 "price_i": float(spec.price(node, b0, check=False)),
                 "slope_i": float(spec.dprice_dA(node, check=False))})
            if res > max(vtol, 1e-10):
                complain(i, f"forecast residual {res:.3g} too large")
            nodes.append(node)
            supplies.append(float(row[col["supply"]]))

    if schema == "asyminfo":
        if summary is None:
            problems.append(f"{path}: no summary row")
            return problems
        agg = float(summary[col["aggregate_A"]])
        a0_rec = float(summary[col["A0"]])
        below = summary[col["below_ree"]] == "true"
        if abs(a0_rec - float(spec.price(a0_rec, b0))) > 1e-8:
            problems.append(f"{path}: recorded A0 is not the fixed point")
        if (agg <= a0_rec + 1e-10) != below:
            problems.append(f"{path}: below_ree flag contradicts the "
                            "recorded aggregate")
        if len(nodes) > 1:
            pop = _parse_density(solver.get("density", ""),
                                 _solver_int(solver, "quad_n", 2001))
            dens = np.asarray(pop.density.pdf(np.asarray(nodes)))
            re_agg = simpson(np.asarray(supplies) * dens, nodes[0],
                             nodes[-1])
            if abs(re_agg - agg) > 1e-9:
                problems.append(
                    f"{path}: aggregate {agg!r} does not match the "
                    f"re-integrated node supplies {re_agg!r}")
        elif len(nodes) == 1:
            s = agent_supply(spec, b0, nodes[0],
                             solver.get("branch", "plus"))
            if abs(s - agg) > max(vtol, 1e-10):
                problems.append(f"{path}: point-mass aggregate does not "
                                "match the recomputed supply")
    return problems


def _cmd_verify(args) -> int:
    vtol = args.tol if args.tol is not None else 1e-10
    problems: list[str] = []
    for name in args.csv:
        problems.extend(_verify_file(Path(name), vtol))
    if problems:
        for p in problems[:20]:
            print(p, file=sys.stderr)
        if len(problems) > 20:
            print(f"... and {len(problems) - 20} more", file=sys.stderr)
        return 4
    print(f"verify: {len(args.csv)} file(s) ok")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None,
                   help="output CSV path ('-' or omitted: stdout; "
                        "scenario output.path is used when set)")
    p.add_argument("--tol", type=float, default=None,
                   help="solver/verification tolerance override")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for the 'random' root policy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyequil",
        description="equilibria for markets with polynomial price "
                    "forecasting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ree", help="solve the frictionless fixed point")
    p.add_argument("--config", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_ree)

    p = sub.add_parser("polyeq", help="equilibria under a forecast penalty")
    p.add_argument("polyeq_variant",
                   choices=["first-order", "param-change", "second-order",
                            "alt-discount", "bounds"])
    p.add_argument("--config", required=True)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--tau1", type=float, default=None)
    p.add_argument("--tau2", type=float, default=None)
    p.add_argument("--tau3", type=float, default=None)
    p.add_argument("--delta-b", dest="delta_b", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_polyeq)

    p = sub.add_parser("learn", help="nearest-point learning trace")
    p.add_argument("--config", required=True)
    p.add_argument("--prior", type=float, default=None,
                   help="initial observed supply (solver.prior_mu)")
    p.add_argument("--policy", default=None,
                   help="plus | minus | alternate | random:<seed>")
    p.add_argument("--tmax", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("asyminfo",
                       help="aggregate supply under dispersed information")
    p.add_argument("--config", required=True)
    p.add_argument("--density", default=None,
                   help="uniform:lo,hi | gauss:mean,sd,lo,hi | point:at")
    p.add_argument("--branch", default=None, choices=["plus", "minus"])
    p.add_argument("--quad-n", dest="quad_n", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_asyminfo)

    p = sub.add_parser("sweep", help="run a scenario's parameter sweep")
    p.add_argument("scenario")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify",
                       help="recheck an emitted CSV against its equations")
    p.add_argument("csv", nargs="+")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except PolyequilError as e:
        print(f"solver error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

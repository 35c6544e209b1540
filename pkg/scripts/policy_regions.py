#!/usr/bin/env python3
"""Comparative statics of the demand-shift response.

Prints, for a grid of shift-forecast discounts tau2, the existence
threshold of the elevated equilibrium and the marginal response of that
equilibrium to the shift at a few points — including where the response
turns negative even though the equilibrium survives.

Usage: python3 scripts/policy_regions.py [--tau1 T] [--tau3 T]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from polyequil import (DemandSpec, marginal_multiplier,
                       parameter_change_equilibria, solve_ree)
from polyequil.errors import ExistenceError


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau1", type=float, default=1.0)
    ap.add_argument("--tau3", type=float, default=0.0)
    args = ap.parse_args()

    spec = DemandSpec.linear(1.0, 0.5, b_ref=1.0)
    b0 = 1.0
    a0 = solve_ree(spec, b0).A0
    shift = float(spec.dprice_db(a0))
    passthrough = shift / (1.0 - float(spec.dprice_dA(a0)))
    print(f"fixed point A0 = {a0:.12f}, frictionless pass-through = "
          f"{passthrough:.6f}")
    print()
    print(f"{'tau2':>8} {'threshold':>10}   response at fractions of it")
    print(f"{'':>8} {'shift/tau2':>10} {'10%':>10} {'50%':>10} {'90%':>10}")
    for tau2 in (0.5, 1.0, 2.0, 5.0, 20.0, 100.0):
        thr = shift / tau2
        cells = []
        for frac in (0.1, 0.5, 0.9):
            db = frac * thr
            try:
                mm = marginal_multiplier(spec, a0, b0, db, args.tau1,
                                         tau2, args.tau3)
                cells.append(f"{mm:>10.4f}")
            except ExistenceError:
                cells.append(f"{'--':>10}")
        print(f"{tau2:>8.1f} {thr:>10.4f} " + " ".join(cells))
    print()
    print("equilibrium sets just around one threshold (tau2 = 2):")
    for db in (0.45, 0.5, 0.55):
        recs = parameter_change_equilibria(spec, a0, b0, db, args.tau1,
                                           2.0, args.tau3)
        kept = [f"{r.delta_A:+.6f} ({r.regime.value})"
                for r in recs if r.valid]
        print(f"  delta_b = {db:4.2f}: " + ", ".join(kept))
    return 0


if __name__ == "__main__":
    sys.exit(main())

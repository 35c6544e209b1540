#!/usr/bin/env python3
"""Print nearest-point learning traces under different root policies.

Usage: python3 scripts/learning_demo.py [--prior MU] [--family FAM]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from polyequil import DemandSpec, RootPolicy, solve_ree
from polyequil.errors import PolyequilError
from polyequil.learning import simulate


def build(family: str) -> tuple[DemandSpec, float]:
    if family == "linear":
        return DemandSpec.linear(1.0, 0.5, b_ref=1.0), 1.0
    if family == "quad_concave":
        return DemandSpec.quad_concave(2.0, 0.5, 0.1), 0.0
    return DemandSpec.exp_convex(1.0, 1.0), 0.0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--prior", type=float, default=0.1)
    ap.add_argument("--family", default="exp_convex",
                    choices=["linear", "exp_convex", "quad_concave"])
    args = ap.parse_args()

    spec, b = build(args.family)
    a0 = solve_ree(spec, b).A0
    print(f"{args.family}: fixed point A0 = {a0:.12f}, "
          f"prior = {args.prior}")
    for policy in ("plus", "alternate", "random:7"):
        print(f"\npolicy = {policy}")
        try:
            # a deliberately divergent policy can walk the convex curve
            # into exp() overflow; the inf prices are fine for display
            with np.errstate(over="ignore"):
                trace = simulate(spec, b, args.prior,
                                 RootPolicy.parse(policy), t_max=12)
        except PolyequilError as e:
            print(f"  aborted: {type(e).__name__}: {e}")
            continue
        print(f"  {'t':>3} {'expansion pt':>14} {'next supply':>14} "
              f"{'gap to A0':>12} root")
        for s in trace.steps:
            print(f"  {s.t:>3} {s.a_star:>14.9f} {s.a_next:>14.9f} "
                  f"{a0 - s.a_next:>12.3e} {s.root_used}"
                  + (" (tie)" if s.tie else ""))
        tail = "converged" if trace.converged else "still moving"
        print(f"  {tail}; final gap {trace.final_gap:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

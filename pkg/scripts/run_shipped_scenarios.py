#!/usr/bin/env python3
"""Run every scenario in scenarios/, verify the output, print a table.

Usage: python3 scripts/run_shipped_scenarios.py [--outdir OUT]
"""

import argparse
import csv
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from polyequil.cli import main as cli_main  # noqa: E402

REPO = Path(__file__).resolve().parents[1]


def command_for(cfg_text: str) -> list[str]:
    """Pick the subcommand a scenario file wants."""
    pairs = dict(
        line.split("#", 1)[0].strip().split(" = ", 1)
        for line in cfg_text.splitlines()
        if " = " in line.split("#", 1)[0]
    )
    if any(k.startswith("sweep.") for k in pairs):
        return ["sweep"]
    variant = pairs["solver.variant"]
    if variant == "ree":
        return ["ree"]
    if variant in ("learn", "asyminfo"):
        return [variant]
    return ["polyeq", variant.replace("_", "-")]


def run(outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    failures = 0
    print(f"{'scenario':34}{'rows':>6}  {'max residual':>13}  verify")
    for cfg in sorted((REPO / "scenarios").glob("*.cfg")):
        out = outdir / (cfg.stem + ".csv")
        cmd = command_for(cfg.read_text())
        if cmd == ["sweep"]:
            argv = ["sweep", str(cfg), "--out", str(out)]
        else:
            argv = cmd + ["--config", str(cfg), "--out", str(out)]
        rc = cli_main(argv)
        if rc != 0:
            print(f"{cfg.stem:34}  run failed with exit {rc}")
            failures += 1
            continue
        rows = [
            r for r in csv.reader(
                ln for ln in out.read_text().splitlines()
                if ln and not ln.startswith("#"))
        ][1:]
        residuals = []
        header = next(csv.reader([out.read_text().splitlines()[0]]))
        if "residual" in header:
            i = header.index("residual")
            residuals = [float(r[i]) for r in rows if r[i] not in ("", "nan")]
        worst = max(residuals) if residuals else float("nan")
        vrc = cli_main(["verify", str(out)])
        if vrc != 0:
            failures += 1
        print(f"{cfg.stem:34}{len(rows):>6}  {worst:>13.3e}  "
              f"{'ok' if vrc == 0 else f'FAIL ({vrc})'}")
    return 1 if failures else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default=str(REPO / "out"))
    args = ap.parse_args()
    sys.exit(run(Path(args.outdir)))

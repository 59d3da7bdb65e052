#!/usr/bin/env python3
"""Trivialize the deformation between x^2 and x^2 + x^3 across Z = {x1 = 0}.

Calibrates the constants, integrates the vector field over a grid in the
calibrated ball, and prints the worst conservation and inverse residuals
plus the Gronwall margin. Trajectories land in out/trivialize/.
"""

import argparse
import json
import sys
from pathlib import Path

from jetsuff.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/trivialize")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol-ode", type=float, default=1e-9)
    args = ap.parse_args()

    code = cli_main(["--germ", str(ROOT / "germs" / "x2.json"),
                     "--pair", str(ROOT / "germs" / "x2_plus_x3.json"),
                     "--cmd", "trivialize", "--seed", str(args.seed),
                     "--tol-ode", str(args.tol_ode), "--out", args.out])
    if code == 1:
        return 1
    doc = json.loads((Path(args.out) / "report.json").read_text())
    c = doc["constants"]
    print(f"C={c['C']:.4f}  C'={c['C_prime']:.4f}  C''={c['C_dprime']:.4f}  "
          f"U_radius={c['U_radius']:.4f}  r0={c['r0']:.4g}")
    print(f"max conservation residual: {doc['max_conservation_residual']:.3e}")
    print(f"max inverse residual:      {doc['max_inverse_residual']:.3e}")
    print(f"gronwall ok: {doc['gronwall']['ok']} "
          f"(worst margin {doc['gronwall']['worst_margin']:.3f})")
    return code


if __name__ == "__main__":
    sys.exit(main())

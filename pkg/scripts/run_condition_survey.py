#!/usr/bin/env python3
"""Run the condition estimator and exponent fit over the bundled germs.

Writes one output directory per germ under out/survey/ and prints a
summary table. Exit status is nonzero if any run errors out.
"""

import argparse
import json
import sys
from pathlib import Path

from jetsuff.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent
GERMS = ["x2", "x3", "sum_of_squares", "x2y2"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/survey")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=512)
    args = ap.parse_args()

    failed = False
    rows = []
    for name in GERMS:
        out = Path(args.out) / name
        code = cli_main(["--germ", str(ROOT / "germs" / f"{name}.json"),
                         "--cmd", "check", "--seed", str(args.seed),
                         "--samples", str(args.samples), "--out", str(out)])
        if code == 1:
            failed = True
            rows.append((name, "error", "-", "-"))
            continue
        cli_main(["--germ", str(ROOT / "germs" / f"{name}.json"),
                  "--cmd", "exponent", "--seed", str(args.seed),
                  "--samples", str(args.samples), "--out", str(out / "exp")])
        doc = json.loads((out / "report.json").read_text())
        exp = json.loads((out / "exp" / "report.json").read_text())
        rows.append((name, doc["estimate"]["verdict"],
                     f"{doc['estimate']['C_hat']:.4g}",
                     f"{exp['fitted_exponent']:.3f}"))

    print(f"{'germ':<16}{'verdict':<14}{'C_hat':<10}exponent")
    for row in rows:
        print(f"{row[0]:<16}{row[1]:<14}{row[2]:<10}{row[3]}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

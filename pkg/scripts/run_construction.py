#!/usr/bin/env python3
"""Build the explicit non-sufficiency witness for x^2 y^2 across Z = {xy = 0}.

The condition ratio is constant along the diagonal, so the violating
sequence a_nu = (3^-nu, 3^-nu) is prescribed rather than searched for.
Verifies the Morse identities, ball disjointness and the strict decay of
the per-ball perturbation size. Report lands in out/construct/.
"""

import argparse
import json
import sys
from pathlib import Path

from jetsuff.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/construct")
    ap.add_argument("--terms", type=int, default=5, help="sequence length N")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seq_path = out / "sequence.json"
    seq_path.write_text(json.dumps({
        "points": [[3.0 ** -v, 3.0 ** -v] for v in range(1, args.terms + 1)],
    }))

    code = cli_main(["--germ", str(ROOT / "germs" / "x2y2.json"),
                     "--cmd", "construct", "--seq", str(seq_path),
                     "--seed", str(args.seed), "--out", str(out)])
    if code == 1:
        return 1
    doc = json.loads((out / "report.json").read_text())
    rep = doc["construction"]
    print(f"value residuals:    max {max(rep['value_residuals']):.2e}")
    print(f"gradient residuals: max {max(rep['gradient_residuals']):.2e}")
    print(f"hessian dets:       {['%.3e' % d for d in rep['hessian_dets']]}")
    print(f"decay per ball:     {[round(d, 4) for d in rep['decay']]}")
    print(f"ok: {rep['ok']}")
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Closed-form matrix elements and area moments against the Fock oracle.

For each leg count, draws random label pairs below the largest
``lambda_1^2`` that the tail rule resolves and records the worst deviation
per quantity.
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from sostar import crosscheck, fock, io


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--legs", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--pairs", type=int, default=10)
    p.add_argument("--cap", type=float, nargs="+", default=[0.5, 0.5, 0.15], help="lambda_1^2 cap per leg count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("results/oracle_sweep.json"))
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    summary = []
    for n, cap in zip(args.legs, args.cap):
        t0 = time.perf_counter()
        devs = []
        for _ in range(args.pairs):
            zeta = crosscheck.random_label(n, rng, cap)
            omega = crosscheck.random_label(n, rng, cap)
            j_max = fock.choose_j_max([zeta, omega])
            devs.append(crosscheck.compare_pair(omega, zeta, fock.build_basis(n, j_max)))
        worst = {k: max(getattr(d, k) for d in devs) for k in ("overlap", "e", "f", "ftilde", "mean", "var", "cov")}
        entry = {"n": n, "cap": cap, "j_max": [d.j_max for d in devs], "worst": worst, "seconds": time.perf_counter() - t0}
        summary.append(entry)
        print(f"N={n} cap={cap}: worst {max(worst.values()):.2e} over {args.pairs} pairs in {entry['seconds']:.1f}s")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(io.dumps(summary))


if __name__ == "__main__":
    main()

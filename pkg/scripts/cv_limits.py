"""Coefficient of variation of the total area for equal-lambda labels.

Sweeps ``lambda^2`` for ranks ``2k`` and writes ``cv``, the upper bound and
the large-area limit ``1 / sqrt(2k)``.
"""

import argparse
from pathlib import Path

import numpy as np

from sostar import antisym, coherent, group


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--ks", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("results/cv_limits.csv"))
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    lam2 = 1 - np.logspace(-4, np.log10(1 - 1e-4), args.points)[::-1]
    rows = []
    for k in args.ks:
        n = 2 * k + 1
        u = group.random_unitary(n, rng)
        for x in lam2:
            rep = coherent.area_report(antisym.antisym_from_canonical(u, [np.sqrt(x)] * k))
            rows.append((k, x, rep.total_mean, rep.cv, rep.cv_upper_bound, 1 / np.sqrt(2 * k)))
        last = rows[-1]
        print(f"k={k}: cv at lambda^2={last[1]:.4f} is {last[3]:.4f}, limit {last[5]:.4f}; cv at lambda^2={lam2[0]:.1e} is {rows[-args.points][3]:.1f}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(args.out, np.array(rows), delimiter=",", header="k,lambda2,mean_area,cv,cv_bound,cv_limit", comments="", fmt="%.12g")


if __name__ == "__main__":
    main()

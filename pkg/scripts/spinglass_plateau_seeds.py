"""Distribution of eps(ceil(N/2)) / eps(1) for seeded uniform spin glasses.

Usage: python3 scripts/spinglass_plateau_seeds.py [--sizes 10 25 50] [--seeds 20]
"""

import argparse
import math

import numpy as np

from hotnet import compiler as cp


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="*", default=[10, 25, 50])
    p.add_argument("--seeds", type=int, default=20)
    args = p.parse_args()
    print("N  strategy  norm  mean   min    max    fraction > 0.5")
    for n in args.sizes:
        half = math.ceil(n / 2)
        for strategy in ("signed", "shift"):
            for norm in (2, "fro"):
                r = np.array([
                    (lambda c: c[half - 1] / c[0])(cp.convergence_curve(cp.spinglass(n, s), 1.0, 1.0, math.inf,
                                                                       strategy, norm))
                    for s in range(args.seeds)
                ])
                print(f"{n:<3d} {strategy:8s} {str(norm):4s}  {r.mean():.3f}  {r.min():.3f}  {r.max():.3f}  "
                      f"{np.mean(r > 0.5):.2f}")


if __name__ == "__main__":
    main()

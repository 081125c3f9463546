"""Noisy QAOA error against the predicted abscissa, with per-point ratios.

Usage: python3 scripts/noise_scaling_study.py --kind rethermalization [--full] [--threads 4] [--csv out.csv]

``--full`` adds the 6-vertex 4-regular graph.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from hotnet import compiler as cp
from hotnet import io as hio
from hotnet import qaoa as qa
from hotnet.core import bose_occupation


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--kind", choices=["dephasing", "rethermalization"], default="dephasing")
    p.add_argument("--full", action="store_true")
    p.add_argument("--M", type=int, nargs="*", default=[1, 3, 5])
    p.add_argument("--ratios", type=float, nargs="*", default=[0.02, 0.08])
    p.add_argument("--x", type=float, nargs="*", default=[0.05, 0.15])
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    args = p.parse_args()
    sizes = [(3, 2), (4, 3), (5, 4)] + ([(6, 4)] if args.full else [])
    graphs = [(f"({n},{d})", cp.dregular(n, d, args.seed), d) for n, d in sizes]
    nbars = [0.0, float(bose_occupation(1.0, 1.0))]
    with ThreadPoolExecutor(args.threads) as pool:
        pts = qa.error_scaling_experiment(graphs, args.M, args.ratios, args.kind, args.x, nbars,
                                          restarts=4, seed=args.seed, executor=pool)
    rows = [[q.graph, q.M, q.ratio, q.nbar, q.x, q.error, q.error / (q.x / 2)] for q in pts]
    header = ["graph", "M", "J_max/|Delta|", "nbar", "x", "infidelity", "infidelity/(x/2)"]
    print(hio.csv_text(header, rows), end="")
    ratio = np.array([r[-1] for r in rows])
    print(f"# ratio range {ratio.min():.3f}..{ratio.max():.3f}, in factor-2 band {np.mean((ratio >= .5) & (ratio <= 2)):.0%}, "
          f"slope {qa.fit_slope(pts):.3f}")
    if args.csv:
        hio.write_csv(args.csv, header, rows)


if __name__ == "__main__":
    main()

"""Diffusion constant of the symmetric steady state over a range of supports.

Prints a CSV of (L1, L2, eps) for several support ratios L1/L2 and reports
whether eps grows with L2 at each ratio.

    python scripts/eps_map_sweep.py [--sigma1 2] [--sigma2 0.5]
"""

import argparse

import numpy as np

from segregation import kernels as kn
from segregation import steady_kr as kr


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--sigma1", type=float, default=2.0)
    p.add_argument("--sigma2", type=float, default=0.5)
    p.add_argument("--n", type=int, default=64)
    args = p.parse_args()
    triple = kn.KernelTriple.multiples(args.sigma1, args.sigma2)
    print("ratio,L1,L2,eps")
    for ratio in (0.3, 0.5, 0.7):
        rows = []
        for L2 in np.linspace(0.4, 1.6, 7):
            if not kr.check_preconditions(triple, ratio * L2, L2):
                continue
            rows += kr.eps_map(triple, [L2], ratio, args.n, args.n)
        for r in rows:
            print(f"{ratio:g},{r.L1:.6g},{r.L2:.6g},{r.eps:.10g}")
        print(f"# ratio {ratio:g}: monotone in L2 = {kr.monotone_increasing(rows)}")


if __name__ == "__main__":
    main()

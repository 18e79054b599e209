"""Transport, asymptotic and eigenvector routes at small eps.

Runs the compare config (or another one) and prints the pairwise L1 distances
between the three w-profiles.

    python scripts/cross_validation.py [--config configs/compare.ini] [--T 20]
"""

import argparse
from pathlib import Path

from segregation import cli, config

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--config", default=str(ROOT / "configs" / "compare.ini"))
    p.add_argument("--T", type=float, default=None, help="override T_long")
    p.add_argument("--out", default="out/compare")
    args = p.parse_args()
    cfg = config.load(args.config)
    if args.T is not None:
        cfg.T_long = args.T
    for line in cli.run(cfg, args.out, "compare"):
        print(line)


if __name__ == "__main__":
    main()

"""Run the four regime configs and print the terminal verdicts.

    python scripts/run_figures.py [--out out/figures]
"""

import argparse
from pathlib import Path

from segregation import cli, config

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="out/figures")
    args = p.parse_args()
    for name in ("fig1", "fig2", "fig3", "fig4"):
        cfg = config.load(ROOT / "configs" / f"{name}.ini")
        lines = cli.run(cfg, Path(args.out) / name)
        picked = [l for l in lines if l.split(" =")[0] in ("overlap_final", "variance_final", "verdict")]
        print(name, "  ".join(picked))


if __name__ == "__main__":
    main()

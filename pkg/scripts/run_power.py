"""Power curves of the two- and three-decision tests on the default grid.

Usage: python scripts/run_power.py --seed 2024 --out power.csv
"""

import argparse

from wsbm.experiments import POWER_GRID, power_curve, write_power_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="power.csv")
    ap.add_argument("--replicates", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--n", type=int, default=200)
    args = ap.parse_args()

    rows = power_curve(POWER_GRID, alpha=args.alpha, replicates=args.replicates, seed=args.seed, n=args.n)
    write_power_csv(rows, args.out)
    print(f"{'mu_diff':>8} {'two':>7} {'three':>7}")
    for r in rows:
        print(f"{r.mu_diff:8.1f} {r.power_two:7.3f} {r.power_three:7.3f}")


if __name__ == "__main__":
    main()

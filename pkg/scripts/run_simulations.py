"""Run every built-in simulation setting and write one results CSV per setting.

Usage: python scripts/run_simulations.py --seed 2024 --out-dir results
"""

import argparse
import logging
import os
from pathlib import Path

from wsbm.classify import STRATEGIES
from wsbm.experiments import N_GRID, SETTINGS, ExperimentConfig, run_experiment, write_results_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--settings", default=",".join(SETTINGS))
    ap.add_argument("--strategies", default="ptr_qda,ordered,ordered_gated,ordered_dynamic,general")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    strategies = tuple(args.strategies.split(","))
    unknown = set(strategies) - set(STRATEGIES)
    if unknown:
        ap.error(f"unknown strategies: {sorted(unknown)}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for setting in args.settings.split(","):
        cfg = ExperimentConfig(
            setting=setting,
            n_grid=N_GRID,
            replicates=args.replicates,
            strategies=strategies,
            seed=args.seed,
            workers=args.workers,
        )
        result = run_experiment(cfg)
        path = out_dir / f"setting_{setting}.csv"
        write_results_csv(result.rows, path)
        logging.info("setting %s -> %s", setting, path)
        for r in result.rows:
            if r.n == max(N_GRID):
                logging.info("  n=%d %-16s %.3f +- %.3f", r.n, r.strategy, r.mean_error, r.ci_half_width)


if __name__ == "__main__":
    main()

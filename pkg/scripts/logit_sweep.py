"""Logistic-coefficient sweep on a synthetic three-class weighted graph.

Writes a directed edge list and label file, then runs the ``classify``
command with ``--logit-sweep`` on a seeded holdout split, the same shape
of analysis one would run on a real connectome.

Usage: python scripts/logit_sweep.py --seed 1 --out-dir sweep
"""

import argparse
from pathlib import Path

import numpy as np

from wsbm.cli import main as cli_main
from wsbm.io import write_edge_list, write_labels
from wsbm.model import BlockModel, Normal, sample_sbm

CLASSES = ("motor", "sensory", "inter")


def synthetic_model(sd=3.0, p=0.3):
    means = ((5.0, 8.0, 11.0), (8.0, 5.0, 8.0), (11.0, 8.0, 5.0))
    F = tuple(tuple(Normal(means[u][v], sd) for v in range(3)) for u in range(3))
    return BlockModel((1 / 3,) * 3, np.full((3, 3), p), F)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out-dir", default="sweep")
    ap.add_argument("--n-per-class", type=int, default=100)
    ap.add_argument("--holdout-fraction", type=float, default=0.9)
    ap.add_argument("--coeffs", default="0.5,1,2,5,10,20,50")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    k = args.n_per_class
    g, labels, _ = sample_sbm(synthetic_model(), (k, k, k), (k, k, k), args.seed)
    ids = [f"v{i}" for i in range(g.n)]
    write_edge_list(g, out / "edges.csv", ids)
    write_labels(labels.assignments, out / "labels.csv", ids, CLASSES)
    return cli_main(
        [
            "classify",
            "--edges", str(out / "edges.csv"),
            "--labels", str(out / "labels.csv"),
            "--strategy", "general_logit",
            "--holdout-fraction", str(args.holdout_fraction),
            "--seed", str(args.seed),
            "--logit-sweep", args.coeffs,
            "--out", str(out / "pred.csv"),
            "--sweep-out", str(out / "sweep.csv"),
        ]
    )


if __name__ == "__main__":
    raise SystemExit(main())

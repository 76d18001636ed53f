#!/usr/bin/env python3
"""Desk-scale MNIST training with SimCIM-corrected negatives.

Expects the raw IDX files (train-images-idx3-ubyte and
train-labels-idx1-ubyte, gzipped or not) on disk; see the README for where
to get them. The default configuration trains on 5000 images for 10
epochs and evaluates accuracy on 1000 held-out images. Pass
--train-count 50000 --val-count 10000 --epochs 50 for the full-scale run
(budget hours, not minutes).
"""

import argparse
import sys

from boltzkit import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--images", required=True, help="train images IDX file")
    parser.add_argument("--labels", required=True, help="train labels IDX file")
    parser.add_argument("--neg", default="simcim-corrected",
                        choices=["exact", "mcmc", "simcim", "simcim-corrected"])
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--minibatch", type=int, default=50)
    parser.add_argument("--train-count", type=int, default=5000)
    parser.add_argument("--val-count", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="results/mnist")
    args = parser.parse_args()
    return cli.run(
        [
            "train",
            "--dataset", "mnist",
            "--mnist-images", args.images,
            "--mnist-labels", args.labels,
            "--neg", args.neg,
            "--epochs", str(args.epochs),
            "--minibatch", str(args.minibatch),
            "--train-count", str(args.train_count),
            "--val-count", str(args.val_count),
            "--metric-cadence", str(max(args.train_count // (2 * args.minibatch), 1)),
            "--seed", str(args.seed),
            "--out-dir", f"{args.out_dir}/{args.neg}",
        ]
    )


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Full-size 16-spin benchmark temperature experiment.

Regenerates the seeded benchmark model, measures the annealer's native
effective temperature from a 50000-sample scale pair, then draws a
corrected batch at beta = 1 and compares it against exact samples. Writes
the delta curves and estimates under results/bench16/.
"""

import argparse
import sys

from boltzkit import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--count", type=int, default=50000)
    parser.add_argument("--out-dir", default="results/bench16")
    args = parser.parse_args()
    return cli.run(
        [
            "bench16",
            "--seed", str(args.seed),
            "--count", str(args.count),
            "--out-dir", args.out_dir,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())

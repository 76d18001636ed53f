#!/usr/bin/env python3
"""Partition function estimates along a BAS training trajectory.

Trains the Boltzmann machine on bars-and-stripes with exact gradients,
snapshots the model every --cadence updates, and estimates ln Z on every
snapshot four ways: exhaustive enumeration (truth), AIS with the exact
sampler, AIS with the temperature-corrected SimCIM sampler, and the
single-step direct estimator at the same total sample budget. Writes one
CSV row per checkpoint under results/logz/.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from boltzkit.ais import AisConfig, direct_log_z, estimate_log_z
from boltzkit.bm import BmTrainConfig, train
from boltzkit.datasets import bas_dataset
from boltzkit.exact import enumerate_states
from boltzkit.rng import substream_seed
from boltzkit.samplers import SamplerSpec


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--updates", type=int, default=2000)
    parser.add_argument("--cadence", type=int, default=50)
    parser.add_argument("--steps", type=int, default=10)
    parser.add_argument("--samples", type=int, default=250)
    parser.add_argument("--train-seed", type=int, default=11)
    parser.add_argument("--seed", type=int, default=99)
    parser.add_argument("--out-dir", default="results/logz")
    args = parser.parse_args()

    checkpoints = []

    def on_update(state):
        if state.update_count % args.cadence == 0:
            checkpoints.append((state.update_count, state.model))

    config = BmTrainConfig(epochs=args.updates, negative_phase="exact", seed=args.train_seed)
    print(f"training {args.updates} exact updates ...", flush=True)
    train(bas_dataset(), config, on_update=on_update)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["update,exact_log_z,ais_exact,ais_simcim,direct"]
    started = time.time()
    for update, model in checkpoints:
        truth = enumerate_states(model, 1.0).log_z
        ais_exact = estimate_log_z(
            model,
            AisConfig(
                sampler=SamplerSpec(kind="exact", seed=substream_seed(args.seed, update, 0)),
                n_intermediate=args.steps,
                samples_per_step=args.samples,
            ),
        ).log_z
        ais_simcim = estimate_log_z(
            model,
            AisConfig(
                sampler=SamplerSpec(kind="simcim", seed=substream_seed(args.seed, update, 1)),
                n_intermediate=args.steps,
                samples_per_step=args.samples,
            ),
        ).log_z
        direct = direct_log_z(
            model,
            SamplerSpec(kind="uniform", seed=substream_seed(args.seed, update, 2)),
            args.steps * args.samples,
        )
        rows.append(
            f"{update},{truth!r},{ais_exact!r},{ais_simcim!r},{direct!r}"
        )
        print(
            f"update {update:5d}: ln Z {truth:8.4f}  "
            f"ais(exact) {100 * abs(ais_exact - truth) / abs(truth):5.2f}%  "
            f"ais(simcim) {100 * abs(ais_simcim - truth) / abs(truth):5.2f}%  "
            f"direct {100 * abs(direct - truth) / abs(truth):5.2f}%",
            flush=True,
        )
    (out_dir / "logz_checkpoints.csv").write_text("\n".join(rows) + "\n")

    data = np.genfromtxt(out_dir / "logz_checkpoints.csv", delimiter=",", names=True)
    truth = data["exact_log_z"]
    for column in ("ais_exact", "ais_simcim", "direct"):
        err = 100 * np.abs(data[column] - truth) / np.abs(truth)
        print(f"{column}: mean {err.mean():.2f}%  max {err.max():.2f}%")
    print(f"done in {time.time() - started:.0f}s -> {out_dir / 'logz_checkpoints.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

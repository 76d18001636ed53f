"""Command line entry point: every experiment as a seeded subcommand.

Subcommands: sample, thermo, logz, train, classify, generate, bas, bench16.
Each run writes its data files plus a <subcommand>_manifest.json recording
the resolved configuration, the seed, and the output paths; re-running with
the manifest's config and seed reproduces the data files byte for byte.

Exit codes: 0 success, 2 usage error, 3 data/format error, 4
numeric/calibration error. Error messages name the failing module.

boltzkit submodules are imported inside the handlers, not at module level:
thread environment variables (BLAS pools in particular) only take effect
when set before numpy loads, and main() must set them first.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .errors import (
    BoltzkitError,
    CalibrationError,
    DimensionError,
    FormatError,
    NumericError,
    ParameterError,
)

_MODULE = "cli"

SUBCOMMANDS = ("sample", "thermo", "logz", "train", "classify", "generate", "bas", "bench16")

_NAN = float("nan")


def _fmt(value) -> str:
    """Shortest round-trip decimal form, identical across runs."""
    return repr(float(value))


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: str, rows) -> None:
    """``rows`` is an iterable of already-joined CSV lines."""
    lines = [header]
    lines.extend(rows)
    _write_text(path, "\n".join(lines) + "\n")


def _write_pgm(path: Path, spins, side: int) -> None:
    """P5 bitmap: spin -1 -> pixel 0, spin +1 -> pixel 255."""
    import numpy as np

    pixels = np.where(np.asarray(spins).reshape(side, side) > 0, 255, 0).astype(np.uint8)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(f"P5\n{side} {side}\n255\n".encode() + pixels.tobytes())
    os.replace(tmp, path)


def _configure_threads(threads) -> None:
    """Pin BLAS to one thread (gemm split points depend on the pool size,
    so multithreaded reductions would break byte-determinism) and cap the
    numba pool, whose prange loops write disjoint rows and are
    order-independent."""
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    os.environ.setdefault("MKL_NUM_THREADS", "1")
    if threads is None:
        return
    if threads < 1:
        raise ParameterError(f"--threads must be positive, got {threads}", module=_MODULE)
    os.environ.setdefault("NUMBA_NUM_THREADS", str(threads))
    if "numba" in sys.modules:  # already imported: resize its pool directly
        import numba

        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def _load_json_file(path, what: str) -> dict:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what} {path} is not valid JSON: {exc}", module=_MODULE) from exc
    if not isinstance(payload, dict):
        raise FormatError(f"{what} {path} must hold a JSON object", module=_MODULE)
    return payload


def _schedule_config(args) -> dict:
    """Merge a --schedule JSON file with the individual schedule flags
    (flags win)."""
    cfg = {}
    if getattr(args, "schedule", None):
        cfg = dict(_load_json_file(args.schedule, "schedule file"))
    for key in ("iterations", "zeta_scale", "sigma", "pump"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _resolved_schedule(args, model):
    from .simcim import schedule_from_config

    return schedule_from_config(model, _schedule_config(args))


def _sampler_spec(args, model, kinds):
    """SamplerSpec from the common sampler flags."""
    from .samplers import SamplerSpec

    kind = args.sampler
    if kind not in kinds:
        raise ParameterError(
            f"--sampler must be one of {kinds} here, got {kind!r}", module=_MODULE
        )
    if kind == "simcim":
        return SamplerSpec(kind="simcim", schedule=_resolved_schedule(args, model))
    return SamplerSpec(kind=kind, beta=args.beta, chain_len=args.chain_len)


# ---------------------------------------------------------------------------
# subcommand handlers: handler(args, out_dir) -> list of written paths


def _cmd_sample(args, out_dir: Path) -> list[Path]:
    from .ising import load_model, save_batch
    from .rng import substream_seed
    from .samplers import draw
    from .simcim import anneal_batch, boltzmann_sample
    from .thermometry import estimate_beta

    model = load_model(args.model)
    if args.trace and args.sampler != "simcim":
        raise ParameterError("--trace requires --sampler simcim", module=_MODULE)
    if args.target_beta is not None and args.sampler != "simcim":
        raise ParameterError("--target-beta requires --sampler simcim", module=_MODULE)
    if args.trace and args.target_beta is not None:
        raise ParameterError("--trace and --target-beta cannot be combined", module=_MODULE)

    spec = _sampler_spec(args, model, ("simcim", "mcmc", "exact", "uniform"))
    draw_seed = substream_seed(args.seed, "draw")
    outputs = []
    if args.sampler == "simcim" and args.target_beta is not None:
        calibration = estimate_beta(
            model,
            spec,
            scale_ratio=args.scale_ratio,
            count=args.cal_count,
            seed=substream_seed(args.seed, "calibration"),
        )
        batch = boltzmann_sample(
            model, args.target_beta, spec.schedule, args.count, draw_seed, calibration
        )
    elif args.sampler == "simcim" and args.trace:
        batch, trace = anneal_batch(model, spec.schedule, args.count, draw_seed, trace=True)
        spins_path = out_dir / "trace_spins.csv"
        _write_csv(
            spins_path,
            "iter,spin_index,value",
            (
                f"{t},{i}," + _fmt(trace.values[t, i])
                for t in range(trace.values.shape[0])
                for i in range(trace.values.shape[1])
            ),
        )
        energy_path = out_dir / "trace_energy.csv"
        _write_csv(
            energy_path,
            "iter,best_energy",
            (f"{t}," + _fmt(e) for t, e in enumerate(trace.best_energy)),
        )
        outputs += [spins_path, energy_path]
    else:
        batch = draw(model, spec, args.count, seed=draw_seed)

    batch_path = out_dir / args.out
    save_batch(batch, batch_path)
    return [batch_path] + outputs


def _cmd_thermo(args, out_dir: Path) -> list[Path]:
    from .ising import load_model, scale_model
    from .rng import substream_seed
    from .samplers import draw, resolve_spec
    from .thermometry import delta_curve, two_batch_estimate

    model = load_model(args.model)
    if not (0.0 < args.scale_ratio < 1.0):
        raise ParameterError(
            f"--scale-ratio must lie in (0, 1), got {args.scale_ratio}", module=_MODULE
        )
    spec = resolve_spec(_sampler_spec(args, model, ("simcim", "mcmc", "exact")), model)
    batch1 = draw(model, spec, args.count, seed=substream_seed(args.seed, 0))
    batch2 = draw(
        scale_model(model, 1.0 / args.scale_ratio),
        spec,
        args.count,
        seed=substream_seed(args.seed, 1),
    )
    estimate = two_batch_estimate(
        batch1,
        batch2,
        model,
        args.scale_ratio,
        bin_width=args.bin_width,
        min_count=args.min_count,
        weighted=not args.unweighted,
    )
    delta_e, delta_l = delta_curve(
        batch1, batch2, model, bin_width=args.bin_width, min_count=args.min_count
    )

    curve_path = out_dir / "thermo_delta.csv"
    _write_csv(
        curve_path,
        "delta_e,delta_l",
        (_fmt(e) + "," + _fmt(l) for e, l in zip(delta_e, delta_l)),
    )
    estimate_path = out_dir / "thermo_estimate.json"
    payload = asdict(estimate)
    payload["sampler"] = spec.kind
    payload["count"] = args.count
    _write_json(estimate_path, payload)
    return [curve_path, estimate_path]


def _cmd_logz(args, out_dir: Path) -> list[Path]:
    from .ais import AisConfig, direct_log_z, estimate_log_z
    from .exact import enumerate_states
    from .ising import load_model
    from .samplers import SamplerSpec

    model = load_model(args.model)
    result_path = out_dir / "logz_estimate.json"
    if args.sampler == "enumerate":
        dist = enumerate_states(model, 1.0)
        _write_json(result_path, {"method": "enumerate", "log_z": float(dist.log_z)})
        return [result_path]
    if args.sampler == "direct":
        # same total budget as the ladder, for like-for-like comparisons
        count = args.steps * args.samples
        spec = SamplerSpec(kind="uniform", seed=args.seed)
        log_z = direct_log_z(model, spec, count)
        _write_json(
            result_path,
            {"method": "direct", "log_z": float(log_z), "samples_consumed": count},
        )
        return [result_path]

    if args.sampler == "simcim":
        spec = SamplerSpec(
            kind="simcim", schedule=_resolved_schedule(args, model), seed=args.seed
        )
    else:
        spec = SamplerSpec(kind=args.sampler, chain_len=args.chain_len, seed=args.seed)
    config = AisConfig(
        sampler=spec, n_intermediate=args.steps, samples_per_step=args.samples
    )
    result = estimate_log_z(model, config)
    payload = result.to_dict()
    payload["method"] = args.sampler
    payload["beta_schedule"] = [float(b) for b in config.beta_schedule]
    _write_json(result_path, payload)

    rungs_path = out_dir / "logz_rungs.csv"
    sched = config.beta_schedule
    _write_csv(
        rungs_path,
        "step,beta_from,beta_to,log_ratio",
        (
            f"{k}," + _fmt(sched[k]) + "," + _fmt(sched[k + 1]) + "," + _fmt(ratio)
            for k, ratio in enumerate(result.per_step_log_ratios)
        ),
    )
    return [result_path, rungs_path]


def _metric_row(update: int, metrics: dict) -> str:
    cells = [str(update)]
    for key in ("loglik", "kl", "accuracy"):
        cells.append(_fmt(metrics.get(key, _NAN)))
    return ",".join(cells)


def _cmd_train(args, out_dir: Path) -> list[Path]:
    from .bm import (
        BmTrainConfig,
        avg_log_likelihood,
        classification_accuracy,
        dataset_kl,
        save_checkpoint,
        train,
    )
    from .datasets import bas_dataset, load_mnist, subset
    from .exact import enumerate_states
    from .ising import save_model

    if args.updates is not None and args.minibatch is not None:
        raise ParameterError(
            "--updates counts full-batch sweeps; use --epochs with --minibatch",
            module=_MODULE,
        )
    epochs = args.epochs if args.epochs is not None else (args.updates or 1)

    if args.dataset == "bas":
        dataset = bas_dataset()
        eval_set = None
        lr = args.lr if args.lr is not None else 0.05
    else:
        if not args.mnist_images or not args.mnist_labels:
            raise ParameterError(
                "--dataset mnist requires --mnist-images and --mnist-labels",
                module=_MODULE,
            )
        dataset = load_mnist(
            args.mnist_images, args.mnist_labels, threshold=args.threshold, split="train"
        )
        if args.train_count is not None:
            dataset = subset(dataset, args.train_count)
        eval_set = load_mnist(
            args.mnist_images, args.mnist_labels, threshold=args.threshold, split="validation"
        )
        if args.val_count is not None:
            eval_set = subset(eval_set, args.val_count)
        lr = args.lr if args.lr is not None else 0.001
    args.lr = lr  # the manifest logs the dataset-resolved rate

    if eval_set is None:

        def eval_fn(model):
            dist = enumerate_states(model, 1.0)
            return {
                "loglik": avg_log_likelihood(model, dataset, dist.log_z),
                "kl": dataset_kl(dataset, dist),
            }

    else:

        def eval_fn(model):
            return {"accuracy": classification_accuracy(model, eval_set)}

    checkpoints = []

    def on_update(state):
        if args.checkpoint_every and state.update_count % args.checkpoint_every == 0:
            checkpoints.append(save_checkpoint(state, out_dir, stem="checkpoint"))

    config = BmTrainConfig(
        learning_rate=lr,
        epochs=epochs,
        minibatch_size=args.minibatch,
        negative_phase=args.neg.replace("-", "_"),
        negative_samples=args.neg_samples,
        metric_cadence=args.metric_cadence,
        seed=args.seed,
        chain_len=args.chain_len,
    )
    state = train(
        dataset,
        config,
        eval_fn=eval_fn,
        on_update=on_update if args.checkpoint_every else None,
    )

    model_path = out_dir / args.out
    save_model(state.model, model_path)
    metrics_path = out_dir / "train_metrics.csv"
    _write_csv(
        metrics_path,
        "update,loglik,kl,accuracy",
        (_metric_row(update, metrics) for update, metrics in state.history),
    )
    final = state.history[-1][1] if state.history else {}
    for key in ("loglik", "kl", "accuracy"):
        if key in final:
            print(f"final {key}: {final[key]:.6f}")
    return [model_path, metrics_path] + checkpoints


def _cmd_classify(args, out_dir: Path) -> list[Path]:
    from .bm import classify_batch
    from .datasets import MNIST_PIXELS, load_mnist, subset
    from .ising import load_model

    model = load_model(args.model)
    dataset = load_mnist(
        args.images, args.labels, threshold=args.threshold, split=args.split
    )
    if args.count is not None:
        dataset = subset(dataset, args.count, args.offset)
    predicted = classify_batch(model, dataset.samples[:, :MNIST_PIXELS])
    labels = dataset.labels
    correct = int((predicted == labels).sum())

    results_path = out_dir / "classify_results.csv"
    _write_csv(
        results_path,
        "index,label,predicted",
        (
            f"{args.offset + i},{int(labels[i])},{int(predicted[i])}"
            for i in range(len(predicted))
        ),
    )
    summary_path = out_dir / "classify_summary.json"
    accuracy = correct / len(predicted)
    _write_json(
        summary_path,
        {"count": len(predicted), "correct": correct, "accuracy": accuracy},
    )
    print(f"accuracy: {accuracy:.4f} ({correct}/{len(predicted)})")
    return [results_path, summary_path]


def _cmd_generate(args, out_dir: Path) -> list[Path]:
    from .bm import generate
    from .datasets import MNIST_CLASSES
    from .ising import load_model
    from .rng import substream_seed

    model = load_model(args.model)
    schedule = _resolved_schedule(args, model)
    if args.digit == "all":
        digits = range(MNIST_CLASSES)
    else:
        digits = [int(args.digit)]
    side = int(round((model.n - MNIST_CLASSES) ** 0.5))
    outputs = []
    for digit in digits:
        batch = generate(
            model, digit, schedule, args.count, seed=substream_seed(args.seed, "digit", digit)
        )
        for i in range(args.count):
            path = out_dir / f"digit{digit}_{i:03d}.pgm"
            _write_pgm(path, batch.samples[i], side)
            outputs.append(path)
    return outputs


def _cmd_bas(args, out_dir: Path) -> list[Path]:
    import numpy as np

    from .datasets import bas_dataset
    from .ising import SpinBatch, save_batch

    dataset = bas_dataset()
    expanded = np.repeat(dataset.samples, dataset.weights, axis=0)
    path = out_dir / "bas_samples.csv"
    save_batch(SpinBatch(samples=expanded), path)
    return [path]


def _cmd_bench16(args, out_dir: Path) -> list[Path]:
    from .ising import random_coupling_model, save_model, scale_model
    from .rng import substream_seed
    from .samplers import SamplerSpec, draw
    from .simcim import boltzmann_sample
    from .thermometry import delta_curve, fit_slope, two_batch_estimate

    model = random_coupling_model(16, seed=args.seed)
    model_path = out_dir / "bench16_model.json"
    save_model(model, model_path)

    spec = SamplerSpec(kind="simcim", schedule=_resolved_schedule(args, model))
    batch1 = draw(model, spec, args.count, seed=substream_seed(args.seed, "native", 0))
    batch2 = draw(
        scale_model(model, 1.0 / args.scale_ratio),
        spec,
        args.count,
        seed=substream_seed(args.seed, "native", 1),
    )
    estimate = two_batch_estimate(batch1, batch2, model, args.scale_ratio)
    raw_e, raw_l = delta_curve(batch1, batch2, model)
    raw_path = out_dir / "bench16_raw_delta.csv"
    _write_csv(
        raw_path,
        "delta_e,delta_l",
        (_fmt(e) + "," + _fmt(l) for e, l in zip(raw_e, raw_l)),
    )

    corrected = boltzmann_sample(
        model,
        args.beta,
        spec.schedule,
        args.count,
        substream_seed(args.seed, "corrected"),
        estimate,
    )
    reference = draw(
        model,
        SamplerSpec(kind="exact", beta=args.beta),
        args.count,
        seed=substream_seed(args.seed, "reference"),
    )
    corr_e, corr_l = delta_curve(corrected, reference, model)
    slope, r_squared, stderr = fit_slope(corr_e, corr_l)
    corr_path = out_dir / "bench16_corrected_delta.csv"
    _write_csv(
        corr_path,
        "delta_e,delta_l",
        (_fmt(e) + "," + _fmt(l) for e, l in zip(corr_e, corr_l)),
    )

    estimates_path = out_dir / "bench16_estimates.json"
    _write_json(
        estimates_path,
        {
            "raw": asdict(estimate),
            "corrected": {
                "target_beta": args.beta,
                "slope": slope,
                "r_squared": r_squared,
                "stderr": stderr,
                "points_used": len(corr_e),
            },
        },
    )
    print(f"native beta1: {estimate.beta1:.4f}  corrected slope: {slope:+.4f}")
    return [model_path, raw_path, corr_path, estimates_path]


_HANDLERS = {
    "sample": _cmd_sample,
    "thermo": _cmd_thermo,
    "logz": _cmd_logz,
    "train": _cmd_train,
    "classify": _cmd_classify,
    "generate": _cmd_generate,
    "bas": _cmd_bas,
    "bench16": _cmd_bench16,
}


# ---------------------------------------------------------------------------
# parser


def build_parser(suppress: bool = False) -> argparse.ArgumentParser:
    """The full CLI parser.

    With ``suppress`` every default becomes argparse.SUPPRESS, so parsing
    yields only the flags the user actually typed; the config-file merge
    uses that to let explicit flags override file values.
    """

    def d(value):
        return argparse.SUPPRESS if suppress else value

    parser = argparse.ArgumentParser(
        prog="boltzkit",
        description="Ising sampling, thermometry, partition functions, and "
        "Boltzmann machine training with a simulated CIM annealer.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    def common(p):
        p.add_argument("--seed", type=int, default=d(None), help="master seed; generated and logged if absent")
        p.add_argument("--out-dir", default=d("."), help="directory all outputs go to")
        p.add_argument("--threads", type=int, default=d(None), help="cap worker threads; results are identical for every value")
        p.add_argument("--config", default=d(None), help="JSON file supplying any flag; explicit flags override it")

    def schedule_flags(p):
        p.add_argument("--schedule", default=d(None), help="JSON schedule config {iterations, zeta_scale, sigma, pump}")
        p.add_argument("--iterations", type=int, default=d(None), help="anneal iterations")
        p.add_argument("--zeta-scale", type=float, default=d(None), help="coupling gain relative to the spectral scale")
        p.add_argument("--sigma", type=float, default=d(None), help="per-iteration noise amplitude")
        p.add_argument("--pump", choices=("linear", "tanh", "constant"), default=d(None), help="pump ramp shape")

    p = sub.add_parser("sample", help="draw a batch of spin configurations")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--sampler", choices=("simcim", "mcmc", "exact", "uniform"), default=d("simcim"))
    p.add_argument("--count", type=int, default=d(1000), help="number of samples")
    p.add_argument("--beta", type=float, default=d(1.0), help="inverse temperature (exact and mcmc)")
    p.add_argument("--chain-len", type=int, default=d(1000), help="Metropolis sweeps per sample")
    p.add_argument("--target-beta", type=float, default=d(None), help="calibrate simcim and sample at this inverse temperature")
    p.add_argument("--cal-count", type=int, default=d(2500), help="samples per calibration batch for --target-beta")
    p.add_argument("--scale-ratio", type=float, default=d(0.76), help="scale ratio of the calibration pair")
    p.add_argument("--trace", action="store_true", default=d(False), help="dump per-iteration trace CSVs (simcim)")
    p.add_argument("--out", default=d("samples.csv"), help="batch CSV filename")
    schedule_flags(p)
    common(p)

    p = sub.add_parser("thermo", help="estimate a sampler's effective temperature")
    p.add_argument("--model", required=True)
    p.add_argument("--sampler", choices=("simcim", "mcmc", "exact"), default=d("simcim"))
    p.add_argument("--count", type=int, default=d(50000), help="samples per batch")
    p.add_argument("--scale-ratio", type=float, default=d(0.76), help="coupling scale ratio between the two batches")
    p.add_argument("--beta", type=float, default=d(1.0), help="native inverse temperature (exact and mcmc)")
    p.add_argument("--chain-len", type=int, default=d(1000))
    p.add_argument("--bin-width", type=float, default=d(None), help="energy histogram bin width (default: pooled span / 50)")
    p.add_argument("--min-count", type=int, default=d(10), help="minimum per-bin count for the fit")
    p.add_argument("--unweighted", action="store_true", default=d(False), help="plain instead of inverse-variance least squares")
    schedule_flags(p)
    common(p)

    p = sub.add_parser("logz", help="estimate ln Z at beta = 1")
    p.add_argument("--model", required=True)
    p.add_argument("--sampler", choices=("exact", "mcmc", "simcim", "direct", "enumerate"), default=d("exact"))
    p.add_argument("--steps", type=int, default=d(10), help="intermediate AIS temperatures")
    p.add_argument("--samples", type=int, default=d(250), help="samples per AIS step (direct uses steps * samples)")
    p.add_argument("--chain-len", type=int, default=d(1000))
    schedule_flags(p)
    common(p)

    p = sub.add_parser("train", help="train a fully visible Boltzmann machine")
    p.add_argument("--dataset", choices=("bas", "mnist"), required=True)
    p.add_argument("--neg", choices=("exact", "mcmc", "simcim", "simcim-corrected"), default=d("exact"), help="negative phase sampler")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--epochs", type=int, default=d(None), help="passes over the dataset")
    group.add_argument("--updates", type=int, default=d(None), help="full-batch gradient updates (BAS convention)")
    p.add_argument("--lr", type=float, default=d(None), help="learning rate (default 0.05 bas, 0.001 mnist)")
    p.add_argument("--minibatch", type=int, default=d(None), help="minibatch size (default: full batch)")
    p.add_argument("--neg-samples", type=int, default=d(250), help="negative phase sample count")
    p.add_argument("--chain-len", type=int, default=d(1000))
    p.add_argument("--metric-cadence", type=int, default=d(50), help="evaluate metrics every this many updates")
    p.add_argument("--checkpoint-every", type=int, default=d(0), help="write checkpoint models every K updates (0: off)")
    p.add_argument("--out", default=d("model.json"), help="final model filename")
    p.add_argument("--mnist-images", default=d(None), help="IDX images file (gzip ok)")
    p.add_argument("--mnist-labels", default=d(None), help="IDX labels file (gzip ok)")
    p.add_argument("--threshold", type=float, default=d(0.3), help="pixel binarization threshold")
    p.add_argument("--train-count", type=int, default=d(None), help="train on this many images")
    p.add_argument("--val-count", type=int, default=d(None), help="evaluate accuracy on this many held-out images")
    common(p)

    p = sub.add_parser("classify", help="classify bitmaps with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--images", required=True, help="IDX images file")
    p.add_argument("--labels", required=True, help="IDX labels file")
    p.add_argument("--threshold", type=float, default=d(0.3))
    p.add_argument("--split", choices=("train", "validation", "test", "all"), default=d("test"))
    p.add_argument("--count", type=int, default=d(None), help="classify this many images")
    p.add_argument("--offset", type=int, default=d(0), help="start at this image")
    common(p)

    p = sub.add_parser("generate", help="sample bitmaps from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--digit", default=d("all"), help="digit 0-9, or all")
    p.add_argument("--count", type=int, default=d(1), help="bitmaps per digit")
    schedule_flags(p)
    common(p)

    p = sub.add_parser("bas", help="export the bars-and-stripes dataset as a sample CSV")
    common(p)

    p = sub.add_parser("bench16", help="regenerate the 16-spin benchmark and its temperature experiment")
    p.add_argument("--count", type=int, default=d(50000), help="samples per batch")
    p.add_argument("--scale-ratio", type=float, default=d(0.76))
    p.add_argument("--beta", type=float, default=d(1.0), help="correction target and exact reference temperature")
    schedule_flags(p)
    common(p)

    return parser


def _merge_config(merged: dict, given: set, subcommand: str) -> None:
    """Fold config-file values into the parsed namespace dict; flags the
    user typed stay as they are."""
    cfg = _load_json_file(merged["config"], "config file")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr in ("config", "subcommand") or attr not in merged:
            raise ParameterError(
                f"config key {key!r} is not a {subcommand} flag", module=_MODULE
            )
        if attr in given:
            continue
        base = merged[attr]
        if isinstance(base, bool):
            merged[attr] = bool(value)
        elif isinstance(base, int) and isinstance(value, (int, float)):
            merged[attr] = int(value)
        elif isinstance(base, float) and isinstance(value, (int, float)):
            merged[attr] = float(value)
        else:
            merged[attr] = value


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        try:
            namespace = build_parser().parse_args(argv)
            given = set(vars(build_parser(suppress=True).parse_args(argv)))
        except SystemExit as exc:  # argparse handles usage errors and --help
            return int(exc.code or 0)
        merged = dict(vars(namespace))
        if merged.get("config"):
            _merge_config(merged, given, namespace.subcommand)
        _configure_threads(merged.get("threads"))
        if merged.get("seed") is None:
            merged["seed"] = int.from_bytes(os.urandom(4), "big")

        args = argparse.Namespace(**merged)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        started = time.perf_counter()
        outputs = _HANDLERS[args.subcommand](args, out_dir)

        from . import __version__

        # vars(args), not merged: handlers may resolve dataset-dependent
        # defaults (train's learning rate) into the namespace
        config = {
            key: value
            for key, value in sorted(vars(args).items())
            if key not in ("subcommand", "config")
        }
        manifest_path = out_dir / f"{args.subcommand}_manifest.json"
        _write_json(
            manifest_path,
            {
                "subcommand": args.subcommand,
                "config": config,
                "seed": args.seed,
                "version": __version__,
                "duration_seconds": time.perf_counter() - started,
                "outputs": sorted(str(p.relative_to(out_dir)) for p in outputs),
            },
        )
        return 0
    except (CalibrationError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (FormatError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: cli: {exc}", file=sys.stderr)
        return 3
    except BoltzkitError as exc:  # ParameterError, CapacityError, ...
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run(argv) -> int:
    """Library-callable entry point; returns the process exit code."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())

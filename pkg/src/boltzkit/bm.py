"""Fully visible Boltzmann machine: gradients, training, classification.

The log-likelihood gradient for +-1 spin data is the difference of data
and model moments,

    dL/dJ_ik = N (<s_i s_k>_data - <s_i s_k>_model)
    dL/db_i  = N (<s_i>_data   - <s_i>_model),

so one gradient-ascent update needs a positive phase (data moments) and a
negative phase (model moments at beta = 1). The negative phase is where
the samplers plug in: exact enumeration, Metropolis, raw SimCIM at its
native temperature, or SimCIM corrected to beta = 1 via thermometry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .datasets import MNIST_CLASSES, MNIST_PIXELS, MNIST_SPINS, SpinDataset
from .errors import CalibrationError, DimensionError, NumericError, ParameterError
from .exact import ENUM_CAP, ExactDistribution, encode_states, enumerate_states, exact_moments
from .ising import IsingModel, SpinBatch, batch_energies, clamp_spins, save_model
from .rng import stream, substream_seed
from .samplers import SamplerSpec, draw, resolve_spec
from .simcim import AnnealSchedule, anneal_batch, boltzmann_sample
from .thermometry import TemperatureEstimate, estimate_beta

_MODULE = "bm"

NEGATIVE_PHASES = ("exact", "mcmc", "simcim", "simcim_corrected")

DEFAULT_LEARNING_RATE = 0.05  # BAS-tuned (KL to ground truth 0.018 after 2000 exact updates); use 0.001 for MNIST
DEFAULT_NEGATIVE_SAMPLES = 250
INIT_COUPLING_STD = 0.01


@dataclass(frozen=True)
class BmTrainConfig:
    learning_rate: float = DEFAULT_LEARNING_RATE
    epochs: int = 1
    minibatch_size: int | None = None  # None: full dataset every update
    negative_phase: str = "exact"
    negative_samples: int = DEFAULT_NEGATIVE_SAMPLES
    metric_cadence: int = 1
    seed: int = 0
    chain_len: int = 1000  # mcmc negative phase only

    def __post_init__(self):
        if not np.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ParameterError(
                f"learning_rate must be positive, got {self.learning_rate}", module=_MODULE
            )
        if self.epochs < 1:
            raise ParameterError(f"epochs must be positive, got {self.epochs}", module=_MODULE)
        if self.minibatch_size is not None and self.minibatch_size < 1:
            raise ParameterError(
                f"minibatch_size must be positive, got {self.minibatch_size}", module=_MODULE
            )
        if self.negative_phase not in NEGATIVE_PHASES:
            raise ParameterError(
                f"negative_phase must be one of {NEGATIVE_PHASES}, got {self.negative_phase!r}",
                module=_MODULE,
            )
        if self.negative_samples < 1:
            raise ParameterError(
                f"negative_samples must be positive, got {self.negative_samples}", module=_MODULE
            )
        if self.metric_cadence < 1:
            raise ParameterError(
                f"metric_cadence must be positive, got {self.metric_cadence}", module=_MODULE
            )


@dataclass(frozen=True)
class BmTrainState:
    model: IsingModel
    epoch: int = 0
    update_count: int = 0
    history: tuple = ()
    calibration: TemperatureEstimate | None = None  # last successful estimate


def random_init(n: int, seed: int, coupling_std: float = INIT_COUPLING_STD) -> IsingModel:
    """Small random symmetric couplings, zero biases."""
    rng = stream(seed)
    raw = rng.normal(0.0, coupling_std, size=(n, n))
    j = np.triu(raw, k=1)
    j = j + j.T
    return IsingModel(j=j, b=np.zeros(n))


def positive_phase(batch) -> tuple[np.ndarray, np.ndarray]:
    """Weighted data moments: correlation matrix (zero diagonal) and mean.

    ``batch`` is a SpinDataset or a plain (k, n) array of +-1 rows.
    """
    if isinstance(batch, SpinDataset):
        samples = batch.samples
        weights = batch.weights.astype(np.float64)
    else:
        samples = np.asarray(batch)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise DimensionError(
                f"minibatch must be a non-empty 2-d array, got shape {samples.shape}",
                module=_MODULE,
            )
        weights = np.ones(samples.shape[0])
    s = samples.astype(np.float64)
    total = weights.sum()
    corr = (s.T * weights) @ s / total
    np.fill_diagonal(corr, 0.0)
    mean = weights @ s / total
    return corr, mean


def _negative_phase(
    model: IsingModel, config: BmTrainConfig, update_seed: int, calibration
) -> tuple[np.ndarray, np.ndarray, TemperatureEstimate | None]:
    """Model moments at beta = 1 per the configured sampler.

    Returns (corr, mean, calibration); calibration is only meaningful for
    simcim_corrected, where each update pays for a fresh two-batch estimate
    and falls back to the last successful one if the fresh fit fails.
    """
    kind = config.negative_phase
    if kind == "exact":
        dist = enumerate_states(model, 1.0)
        mean, corr = exact_moments(dist)
        corr = corr.copy()
        np.fill_diagonal(corr, 0.0)
        return corr, mean, calibration

    if kind == "mcmc":
        spec = SamplerSpec(kind="mcmc", beta=1.0, chain_len=config.chain_len)
        batch = draw(model, spec, config.negative_samples, seed=substream_seed(update_seed, 0))
    elif kind == "simcim":
        spec = resolve_spec(SamplerSpec(kind="simcim"), model)
        batch = anneal_batch(
            model, spec.schedule, config.negative_samples, seed=substream_seed(update_seed, 0)
        )
    else:  # simcim_corrected
        spec = resolve_spec(SamplerSpec(kind="simcim"), model)
        try:
            calibration = estimate_beta(
                model,
                spec,
                count=config.negative_samples,
                seed=substream_seed(update_seed, 1),
            )
        except CalibrationError:
            # early in training the model is nearly uniform and the fit can
            # degenerate; the previous estimate (or the native temperature)
            # is the best available stand-in
            if calibration is not None:
                calibration = replace(calibration, model_key=None)
        if calibration is not None:
            batch = boltzmann_sample(
                model,
                1.0,
                spec.schedule,
                config.negative_samples,
                seed=substream_seed(update_seed, 0),
                calibration=calibration,
            )
        else:
            batch = anneal_batch(
                model, spec.schedule, config.negative_samples, seed=substream_seed(update_seed, 0)
            )
    corr, mean = positive_phase(batch.samples)
    return corr, mean, calibration


def bm_update(state: BmTrainState, minibatch, config: BmTrainConfig) -> BmTrainState:
    """One gradient-ascent step on J and b from one minibatch."""
    pos_corr, pos_mean = positive_phase(minibatch)
    if pos_mean.shape[0] != state.model.n:
        raise DimensionError(
            f"minibatch width {pos_mean.shape[0]} does not match model n={state.model.n}",
            module=_MODULE,
        )
    update_seed = substream_seed(config.seed, state.update_count)
    neg_corr, neg_mean, calibration = _negative_phase(
        state.model, config, update_seed, state.calibration
    )
    xi = config.learning_rate
    j = state.model.j + xi * (pos_corr - neg_corr)
    b = state.model.b + xi * (pos_mean - neg_mean)
    np.fill_diagonal(j, 0.0)
    if not (np.all(np.isfinite(j)) and np.all(np.isfinite(b))):
        raise NumericError(
            f"non-finite parameters after update {state.update_count}", module=_MODULE
        )
    return BmTrainState(
        model=IsingModel(j=j, b=b),
        epoch=state.epoch,
        update_count=state.update_count + 1,
        history=state.history,
        calibration=calibration,
    )


def train(
    dataset: SpinDataset,
    config: BmTrainConfig,
    init: IsingModel | None = None,
    eval_fn=None,
    on_update=None,
) -> BmTrainState:
    """Gradient-ascent loop over epochs of minibatches.

    ``eval_fn(model) -> dict`` is called every config.metric_cadence updates
    (and once at the end) and its metrics land in state.history as
    (update_count, metrics). ``on_update(state)`` runs after every update,
    for checkpointing. Minibatch order is reshuffled each epoch with a
    seeded stream; full-batch mode (minibatch_size None or >= len) keeps
    the dataset's own weighting and order.
    """
    if init is None:
        init = random_init(dataset.n, substream_seed(config.seed, "init"))
    if init.n != dataset.n:
        raise DimensionError(
            f"init model n={init.n} does not match dataset n={dataset.n}", module=_MODULE
        )
    full_batch = config.minibatch_size is None or config.minibatch_size >= len(dataset)
    state = BmTrainState(model=init)
    history = []

    def evaluate(state: BmTrainState) -> BmTrainState:
        metrics = eval_fn(state.model)
        history.append((state.update_count, dict(metrics)))
        return replace(state, history=tuple(history))

    for epoch in range(config.epochs):
        state = replace(state, epoch=epoch)
        if full_batch:
            batches = [dataset]
        else:
            order = stream(substream_seed(config.seed, "shuffle", epoch)).permutation(len(dataset))
            batches = [
                dataset.samples[order[start : start + config.minibatch_size]]
                for start in range(0, len(order), config.minibatch_size)
            ]
        for minibatch in batches:
            state = bm_update(state, minibatch, config)
            if eval_fn is not None and state.update_count % config.metric_cadence == 0:
                state = evaluate(state)
            if on_update is not None:
                on_update(state)
    if eval_fn is not None and (not history or history[-1][0] != state.update_count):
        state = evaluate(state)
    return state


def avg_log_likelihood(model: IsingModel, dataset: SpinDataset, log_z: float) -> float:
    """Mean over the weighted dataset of ln p(s) = -E(s) - ln Z."""
    energies = batch_energies(model, dataset.samples)
    w = dataset.weights.astype(np.float64)
    return float((w @ (-energies - log_z)) / w.sum())


def dataset_kl(dataset: SpinDataset, dist: ExactDistribution) -> float:
    """KL divergence from the dataset's weighted empirical distribution to
    an exact model distribution (n <= enumeration cap)."""
    if dataset.n != dist.n:
        raise DimensionError(f"dimension mismatch: {dataset.n} vs {dist.n}", module=_MODULE)
    p = dataset.weights / dataset.total_weight
    log_q = dist.log_probs[encode_states(dataset.samples)]
    return float(np.sum(p * (np.log(p) - log_q)))


def label_block(digit: int) -> np.ndarray:
    """One-hot +-1 block for a digit, -1 everywhere except +1 at digit."""
    if not 0 <= digit < MNIST_CLASSES:
        raise ParameterError(f"digit must lie in 0..9, got {digit}", module=_MODULE)
    block = np.full(MNIST_CLASSES, -1, dtype=np.int8)
    block[digit] = 1
    return block


def classify_batch(model: IsingModel, bitmaps: np.ndarray) -> np.ndarray:
    """Energy-minimizing digit for each 784-pixel row; ties -> smallest."""
    if model.n != MNIST_SPINS:
        raise DimensionError(
            f"classification needs an n={MNIST_SPINS} model, got n={model.n}", module=_MODULE
        )
    bitmaps = np.asarray(bitmaps)
    if bitmaps.ndim == 1:
        bitmaps = bitmaps[None, :]
    if bitmaps.shape[1] != MNIST_PIXELS:
        raise DimensionError(
            f"bitmaps have width {bitmaps.shape[1]}, expected {MNIST_PIXELS}", module=_MODULE
        )
    count = bitmaps.shape[0]
    energies = np.empty((MNIST_CLASSES, count))
    full = np.empty((count, MNIST_SPINS), dtype=np.int8)
    full[:, :MNIST_PIXELS] = bitmaps
    for digit in range(MNIST_CLASSES):
        full[:, MNIST_PIXELS:] = label_block(digit)
        energies[digit] = batch_energies(model, full)
    return np.argmin(energies, axis=0)  # argmin returns the first (smallest) digit on ties


def classify(model: IsingModel, bitmap: np.ndarray) -> int:
    """Single-bitmap convenience wrapper around classify_batch."""
    return int(classify_batch(model, np.asarray(bitmap))[0])


def classification_accuracy(model: IsingModel, dataset: SpinDataset) -> float:
    """Fraction of dataset rows whose pixel block classifies to its label."""
    if dataset.labels is None:
        raise ParameterError("dataset has no labels", module=_MODULE)
    predicted = classify_batch(model, dataset.samples[:, :MNIST_PIXELS])
    return float(np.mean(predicted == dataset.labels))


def generate(
    model: IsingModel, digit: int, schedule: AnnealSchedule, count: int, seed: int
) -> SpinBatch:
    """Sample pixel bitmaps with the label block clamped to ``digit``.

    The clamp folds label-pixel couplings into effective biases; the 784
    free spins are then annealed and returned (pixels only, no label block).
    """
    if model.n != MNIST_SPINS:
        raise DimensionError(
            f"generation needs an n={MNIST_SPINS} model, got n={model.n}", module=_MODULE
        )
    block = label_block(digit)
    clamped = clamp_spins(
        model, {MNIST_PIXELS + i: int(block[i]) for i in range(MNIST_CLASSES)}
    )
    batch = anneal_batch(clamped.model, schedule, count, seed)
    return SpinBatch(samples=batch.samples)


def save_checkpoint(state: BmTrainState, directory, stem: str = "model") -> Path:
    """Write the state's model as <stem>_<update_count padded>.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{stem}_{state.update_count:06d}.json"
    save_model(state.model, path)
    return path

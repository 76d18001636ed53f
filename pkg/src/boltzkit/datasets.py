"""Training datasets as +-1 spin vectors: bars-and-stripes and MNIST.

Both produce :class:`SpinDataset`, a weighted, optionally labeled set of
equal-length spin rows. BAS is generated; MNIST is read from the standard
IDX files (gzipped or plain), binarized at a threshold, and augmented with
a 10-spin one-hot label block so a fully visible machine can learn the
joint pixel-label distribution.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError, ParameterError
from .rng import stream

_MODULE = "datasets"

BAS_SIDE = 4
MNIST_PIXELS = 784
MNIST_CLASSES = 10
MNIST_SPINS = MNIST_PIXELS + MNIST_CLASSES
DEFAULT_THRESHOLD = 0.3
VALIDATION_COUNT = 10000

_IMAGE_MAGIC = 0x00000803
_LABEL_MAGIC = 0x00000801


@dataclass(frozen=True)
class SpinDataset:
    """Rows of +-1 spins with integer multiplicities and optional labels."""

    samples: np.ndarray  # (k, n) int8
    weights: np.ndarray  # (k,) int64
    labels: np.ndarray | None = None
    split: str = "train"

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.int8)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise ParameterError(
                f"samples must be a non-empty 2-d array, got shape {samples.shape}", module=_MODULE
            )
        if not np.all(np.abs(samples) == 1):
            raise ParameterError("samples must consist of +-1 spins", module=_MODULE)
        weights = np.asarray(self.weights, dtype=np.int64)
        if weights.shape != (samples.shape[0],):
            raise DimensionError(
                f"weights shape {weights.shape} does not match {samples.shape[0]} rows",
                module=_MODULE,
            )
        if np.any(weights < 1):
            raise ParameterError("weights must be positive integers", module=_MODULE)
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (samples.shape[0],):
                raise DimensionError(
                    f"labels shape {labels.shape} does not match {samples.shape[0]} rows",
                    module=_MODULE,
                )
            labels.setflags(write=False)
        samples.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())


def bas_dataset() -> SpinDataset:
    """All 4x4 bars-and-stripes bitmaps, row-major, as 16-spin rows.

    Bars (every row constant) come first in row-bitmask order, then stripes
    (every column constant) excluding the two all-equal bitmaps already
    present among the bars. The all-(-1) and all-(+1) bitmaps get weight 2,
    everything else weight 1: 30 distinct rows, total weight 32.
    """
    rows = []
    weights = []
    full = (1 << BAS_SIDE) - 1
    for mask in range(1 << BAS_SIDE):
        bits = [(1 if mask >> r & 1 else -1) for r in range(BAS_SIDE)]
        bitmap = np.repeat(bits, BAS_SIDE).astype(np.int8)  # constant rows
        rows.append(bitmap)
        weights.append(2 if mask in (0, full) else 1)
    for mask in range(1, full):  # skip the shared all-equal bitmaps
        bits = [(1 if mask >> c & 1 else -1) for c in range(BAS_SIDE)]
        bitmap = np.tile(bits, BAS_SIDE).astype(np.int8)  # constant columns
        rows.append(bitmap)
        weights.append(1)
    return SpinDataset(samples=np.array(rows), weights=np.array(weights), split="train")


def bas_ground_truth_log_likelihood() -> float:
    """Average log-likelihood of the BAS generating distribution itself,
    the ceiling any model can reach on this data."""
    data = bas_dataset()
    p = data.weights / data.total_weight
    return float(np.sum(data.weights * np.log(p)) / data.total_weight)


def _read_exact(fh, size: int, what: str) -> bytes:
    buf = fh.read(size)
    if len(buf) != size:
        raise FormatError(f"truncated file while reading {what}", module=_MODULE)
    return buf


def _open_maybe_gzip(path: Path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def read_idx_images(path) -> np.ndarray:
    """Raw (count, rows, cols) uint8 pixels from an IDX image file."""
    path = Path(path)
    with _open_maybe_gzip(path) as fh:
        magic, count, rows, cols = struct.unpack(">iiii", _read_exact(fh, 16, "image header"))
        if magic != _IMAGE_MAGIC:
            raise FormatError(
                f"bad magic number {magic:#010x} in {path.name}, expected {_IMAGE_MAGIC:#010x}",
                module=_MODULE,
            )
        if count < 1 or rows < 1 or cols < 1:
            raise FormatError(f"bad image header counts ({count}, {rows}, {cols})", module=_MODULE)
        data = _read_exact(fh, count * rows * cols, "image pixels")
    return np.frombuffer(data, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    """Raw (count,) uint8 labels from an IDX label file."""
    path = Path(path)
    with _open_maybe_gzip(path) as fh:
        magic, count = struct.unpack(">ii", _read_exact(fh, 8, "label header"))
        if magic != _LABEL_MAGIC:
            raise FormatError(
                f"bad magic number {magic:#010x} in {path.name}, expected {_LABEL_MAGIC:#010x}",
                module=_MODULE,
            )
        if count < 1:
            raise FormatError(f"bad label count {count}", module=_MODULE)
        data = _read_exact(fh, count, "label bytes")
    return np.frombuffer(data, dtype=np.uint8)


def one_hot_block(labels: np.ndarray) -> np.ndarray:
    """(k, 10) spin block: -1 everywhere except +1 at each row's label."""
    labels = np.asarray(labels, dtype=np.int64)
    if np.any((labels < 0) | (labels >= MNIST_CLASSES)):
        raise ParameterError("labels must lie in 0..9", module=_MODULE)
    block = np.full((len(labels), MNIST_CLASSES), -1, dtype=np.int8)
    block[np.arange(len(labels)), labels] = 1
    return block


def load_mnist(
    images_path,
    labels_path,
    threshold: float = DEFAULT_THRESHOLD,
    split: str = "train",
    validation_count: int = VALIDATION_COUNT,
    shuffle_seed: int | None = None,
) -> SpinDataset:
    """MNIST file pair -> 794-spin dataset (784 binarized pixels + one-hot).

    Pixels are scaled to [0, 1] and mapped to +1 when >= threshold. The
    training file is split deterministically: ``split="train"`` keeps the
    first count - validation_count images, ``split="validation"`` the last
    validation_count, ``split="all"`` (or "test") everything. An optional
    seeded shuffle is applied before splitting.
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise FormatError(
            f"image count {len(images)} does not match label count {len(labels)}",
            module=_MODULE,
        )
    if images.shape[1] * images.shape[2] != MNIST_PIXELS:
        raise FormatError(
            f"expected 28x28 images, got {images.shape[1]}x{images.shape[2]}", module=_MODULE
        )
    count = len(images)
    order = np.arange(count)
    if shuffle_seed is not None:
        order = stream(shuffle_seed).permutation(count)
    if split in ("all", "test"):
        pass
    elif split == "train":
        if count <= validation_count:
            raise ParameterError(
                f"cannot hold out {validation_count} of {count} images", module=_MODULE
            )
        order = order[: count - validation_count]
    elif split == "validation":
        if count <= validation_count:
            raise ParameterError(
                f"cannot hold out {validation_count} of {count} images", module=_MODULE
            )
        order = order[count - validation_count :]
    else:
        raise ParameterError(f"unknown split {split!r}", module=_MODULE)

    pixels = images[order].reshape(len(order), MNIST_PIXELS).astype(np.float64) / 255.0
    spins = np.where(pixels >= threshold, 1, -1).astype(np.int8)
    chosen = labels[order]
    vectors = np.concatenate([spins, one_hot_block(chosen)], axis=1)
    return SpinDataset(
        samples=vectors,
        weights=np.ones(len(order), dtype=np.int64),
        labels=chosen.astype(np.int64),
        split=split if split != "all" else "test",
    )


def subset(dataset: SpinDataset, count: int, offset: int = 0) -> SpinDataset:
    """First ``count`` rows starting at ``offset``, preserving labels."""
    if count < 1 or offset < 0 or offset + count > len(dataset):
        raise ParameterError(
            f"cannot take {count} rows at offset {offset} from {len(dataset)}", module=_MODULE
        )
    sl = slice(offset, offset + count)
    return SpinDataset(
        samples=dataset.samples[sl],
        weights=dataset.weights[sl],
        labels=None if dataset.labels is None else dataset.labels[sl],
        split=dataset.split,
    )

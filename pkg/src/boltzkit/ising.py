"""Core Ising/Boltzmann-machine model types and energy evaluation.

The energy of a spin configuration s in {-1,+1}^n is

    E(s) = -1/2 s^T J s - b^T s

with J a symmetric zero-diagonal coupling matrix and b a bias vector.
Models are immutable after construction; arrays are stored read-only so
they can be shared freely across workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError, ParameterError

_MODULE = "ising"


def _frozen_array(a, dtype=np.float64) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class IsingModel:
    """Symmetric fully-connected Ising model (couplings ``j``, biases ``b``)."""

    j: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.j, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise DimensionError(f"coupling matrix must be square, got shape {j.shape}", module=_MODULE)
        n = j.shape[0]
        if b.shape != (n,):
            raise DimensionError(f"bias vector shape {b.shape} does not match n={n}", module=_MODULE)
        if not (np.all(np.isfinite(j)) and np.all(np.isfinite(b))):
            raise ParameterError("couplings and biases must be finite", module=_MODULE)
        if not np.array_equal(j, j.T):
            raise ParameterError("coupling matrix must be exactly symmetric", module=_MODULE)
        if np.any(np.diagonal(j) != 0.0):
            raise ParameterError("coupling matrix diagonal must be zero", module=_MODULE)
        object.__setattr__(self, "j", _frozen_array(j))
        object.__setattr__(self, "b", _frozen_array(b))

    @property
    def n(self) -> int:
        return self.j.shape[0]

    def key(self) -> str:
        """Digest identifying this model's exact parameter values."""
        h = hashlib.sha256()
        h.update(np.int64(self.n).tobytes())
        h.update(self.j.tobytes())
        h.update(self.b.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class SpinBatch:
    """A set of +-1 spin configurations with optional recorded energies.

    ``energies[i]`` is the energy of ``samples[i]`` under the model whose
    digest is ``model_key``; ``target_beta`` tags batches produced by a
    temperature-corrected sampler.
    """

    samples: np.ndarray
    energies: np.ndarray | None = None
    model_key: str | None = None
    target_beta: float | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.int8)
        if s.ndim != 2:
            raise DimensionError(f"samples must be 2-d (count, n), got shape {s.shape}", module=_MODULE)
        if s.size and not np.all(np.abs(s) == 1):
            raise ParameterError("spin values must be exactly -1 or +1", module=_MODULE)
        object.__setattr__(self, "samples", _frozen_array(s, dtype=np.int8))
        if self.energies is not None:
            e = _frozen_array(self.energies)
            if e.shape != (s.shape[0],):
                raise DimensionError("energies length must match sample count", module=_MODULE)
            object.__setattr__(self, "energies", e)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]


def check_spins(model: IsingModel, s) -> np.ndarray:
    s = np.asarray(s)
    if s.shape != (model.n,):
        raise DimensionError(f"spin vector shape {s.shape} does not match n={model.n}", module=_MODULE)
    if not np.all(np.abs(s) == 1):
        raise ParameterError("spin values must be exactly -1 or +1", module=_MODULE)
    return s.astype(np.float64)


def energy(model: IsingModel, s) -> float:
    """E(s) = -1/2 s^T J s - b^T s for a single configuration."""
    sf = check_spins(model, s)
    return float(-0.5 * sf @ (model.j @ sf) - model.b @ sf)


def batch_energies(model: IsingModel, samples: np.ndarray) -> np.ndarray:
    """Energies of a (count, n) matrix of spin rows under ``model``."""
    s = np.asarray(samples, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] != model.n:
        raise DimensionError(
            f"sample matrix shape {s.shape} does not match n={model.n}", module=_MODULE
        )
    return -0.5 * np.einsum("ij,ij->i", s @ model.j, s) - s @ model.b


def ensure_energies(batch: SpinBatch, model: IsingModel) -> np.ndarray:
    """Batch energies under ``model``, reusing the recorded column when it
    was computed for the same model."""
    if batch.energies is not None and batch.model_key == model.key():
        return batch.energies
    return batch_energies(model, batch.samples)


def scale_model(model: IsingModel, factor: float) -> IsingModel:
    """Multiply couplings and biases by ``factor`` (> 0).

    Scaling the model by c is equivalent to scaling the inverse temperature
    of its Boltzmann distribution by c.
    """
    f = float(factor)
    if not np.isfinite(f) or f <= 0:
        raise ParameterError(f"scale factor must be a positive finite real, got {factor}", module=_MODULE)
    return IsingModel(j=model.j * f, b=model.b * f)


@dataclass(frozen=True)
class ClampedModel:
    """Reduced model over free spins after clamping a subset to fixed values.

    ``energy(model, s_free) + offset`` equals the full-model energy of the
    merged configuration.
    """

    model: IsingModel
    offset: float
    free_indices: np.ndarray
    clamped_indices: np.ndarray
    clamped_values: np.ndarray

    def merge(self, s_free) -> np.ndarray:
        """Reassemble a full spin vector from free spins plus clamped values."""
        s_free = np.asarray(s_free)
        n_full = len(self.free_indices) + len(self.clamped_indices)
        if s_free.shape[-1] != len(self.free_indices):
            raise DimensionError("free spin vector has wrong length", module=_MODULE)
        full = np.empty(s_free.shape[:-1] + (n_full,), dtype=s_free.dtype)
        full[..., self.free_indices] = s_free
        full[..., self.clamped_indices] = self.clamped_values.astype(s_free.dtype)
        return full


def clamp_spins(model: IsingModel, clamped: dict[int, int]) -> ClampedModel:
    """Fold fixed spins into effective biases on the remaining free spins."""
    if not clamped:
        return ClampedModel(
            model=model,
            offset=0.0,
            free_indices=_frozen_array(np.arange(model.n), dtype=np.int64),
            clamped_indices=_frozen_array(np.empty(0), dtype=np.int64),
            clamped_values=_frozen_array(np.empty(0), dtype=np.int8),
        )
    idx = np.fromiter(clamped.keys(), dtype=np.int64)
    vals = np.fromiter((clamped[int(i)] for i in idx), dtype=np.int8)
    if len(np.unique(idx)) != len(idx):
        raise ParameterError("clamped indices must be distinct", module=_MODULE)
    if idx.min() < 0 or idx.max() >= model.n:
        raise ParameterError("clamped index out of range", module=_MODULE)
    if not np.all(np.abs(vals) == 1):
        raise ParameterError("clamped values must be -1 or +1", module=_MODULE)
    order = np.argsort(idx)
    idx, vals = idx[order], vals[order]
    free = np.setdiff1d(np.arange(model.n), idx)
    c = vals.astype(np.float64)
    j_cc = model.j[np.ix_(idx, idx)]
    b_free = model.b[free] + model.j[np.ix_(free, idx)] @ c
    offset = float(-0.5 * c @ (j_cc @ c) - model.b[idx] @ c)
    reduced = IsingModel(j=model.j[np.ix_(free, free)], b=b_free)
    return ClampedModel(
        model=reduced,
        offset=offset,
        free_indices=_frozen_array(free, dtype=np.int64),
        clamped_indices=_frozen_array(idx, dtype=np.int64),
        clamped_values=_frozen_array(vals, dtype=np.int8),
    )


def random_coupling_model(n: int, seed: int, values=(-1.0, 0.0, 1.0)) -> IsingModel:
    """Zero-bias model with off-diagonal couplings drawn uniformly from ``values``.

    The seeded 16-spin instance of this family is the small benchmark used
    throughout the test suite.
    """
    from .rng import stream

    if n < 1:
        raise ParameterError("n must be positive", module=_MODULE)
    rng = stream(seed)
    j = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    j[iu] = rng.choice(np.asarray(values, dtype=np.float64), size=len(iu[0]))
    j = j + j.T
    return IsingModel(j=j, b=np.zeros(n))


# ---------------------------------------------------------------------------
# file formats


def save_model(model: IsingModel, path) -> None:
    """Write a model as JSON: {"n": n, "j": [n*n row-major], "b": [n]}."""
    doc = {"n": model.n, "j": model.j.ravel().tolist(), "b": model.b.tolist()}
    Path(path).write_text(json.dumps(doc))


def load_model(path) -> IsingModel:
    """Read and validate a model JSON file."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read model file {path}: {exc}", module=_MODULE) from exc
    try:
        n = int(doc["n"])
        j = np.asarray(doc["j"], dtype=np.float64).reshape(n, n)
        b = np.asarray(doc["b"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model document in {path}: {exc}", module=_MODULE) from exc
    try:
        return IsingModel(j=j, b=b)
    except (ParameterError, DimensionError) as exc:
        raise FormatError(f"invalid model in {path}: {exc}", module=_MODULE) from exc


def save_batch(batch: SpinBatch, path) -> None:
    """Write a batch as CSV with header s0,...,s{n-1}[,energy]."""
    n = batch.n
    cols = [f"s{i}" for i in range(n)]
    with open(path, "w") as fh:
        if batch.energies is not None:
            fh.write(",".join(cols + ["energy"]) + "\n")
            for row, e in zip(batch.samples, batch.energies):
                fh.write(",".join(str(int(v)) for v in row) + f",{float(e)!r}\n")
        else:
            fh.write(",".join(cols) + "\n")
            for row in batch.samples:
                fh.write(",".join(str(int(v)) for v in row) + "\n")


def load_batch(path) -> SpinBatch:
    """Read a sample CSV written by :func:`save_batch`."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        names = header.split(",") if header else []
        has_energy = bool(names) and names[-1] == "energy"
        n = len(names) - (1 if has_energy else 0)
        if n < 1 or names[:n] != [f"s{i}" for i in range(n)]:
            raise FormatError(f"bad sample CSV header in {path}: {header!r}", module=_MODULE)
        spins, energies = [], []
        for ln, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != len(names):
                raise FormatError(f"row {ln} of {path} has {len(parts)} fields, expected {len(names)}", module=_MODULE)
            try:
                spins.append([int(v) for v in parts[:n]])
                if has_energy:
                    energies.append(float(parts[n]))
            except ValueError as exc:
                raise FormatError(f"row {ln} of {path}: {exc}", module=_MODULE) from exc
    samples = np.asarray(spins, dtype=np.int8).reshape(-1, n)
    return SpinBatch(samples=samples, energies=np.asarray(energies) if has_energy else None)

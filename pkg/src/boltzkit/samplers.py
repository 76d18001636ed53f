"""Sampler contract and baseline samplers (uniform, single-spin Metropolis).

Every sampler maps (model, count, seed) to a :class:`SpinBatch`. MCMC runs
``count`` independent chains and keeps one final state per chain, so batch
entries are independent draws. Chain c consumes only the random stream
``stream(seed, c)``, which makes batches identical whether chains run
serially or split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import ParameterError
from .ising import IsingModel, SpinBatch, batch_energies
from .rng import stream

_MODULE = "samplers"

SAMPLER_KINDS = ("exact", "mcmc", "simcim", "uniform")

_BLOCK_BYTES = 128 << 20


@dataclass(frozen=True)
class SamplerSpec:
    """Which sampler to run and its kind-specific parameters.

    ``beta`` is the native inverse temperature for the exact and mcmc kinds
    (simcim's native temperature is emergent and measured by thermometry;
    uniform is beta=0 by definition).
    """

    kind: str
    seed: int = 0
    beta: float = 1.0
    chain_len: int = 1000
    schedule: object | None = None  # AnnealSchedule, resolved lazily for simcim

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ParameterError(f"unknown sampler kind {self.kind!r}", module=_MODULE)
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ParameterError(f"beta must be finite and >= 0, got {self.beta}", module=_MODULE)
        if self.chain_len < 1:
            raise ParameterError(f"chain_len must be >= 1, got {self.chain_len}", module=_MODULE)
        if int(self.seed) < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}", module=_MODULE)


def uniform_sample(n: int, count: int, seed: int) -> SpinBatch:
    """``count`` i.i.d. vectors with each spin +-1 equiprobably."""
    if n < 1 or count < 1:
        raise ParameterError(f"n and count must be positive, got n={n} count={count}", module=_MODULE)
    rng = stream(seed)
    samples = (2 * rng.integers(0, 2, size=(count, n)) - 1).astype(np.int8)
    return SpinBatch(samples=samples)


@njit(parallel=True, cache=True)
def _metropolis_chains(j, b, beta, u, out):  # pragma: no cover - compiled
    m, rows, n = u.shape
    sweeps = rows - 1
    for c in prange(m):
        s = np.empty(n)
        for i in range(n):
            s[i] = 1.0 if u[c, 0, i] < 0.5 else -1.0
        for t in range(1, sweeps + 1):
            for i in range(n):
                field = b[i]
                for k in range(n):
                    field += j[i, k] * s[k]
                d_e = 2.0 * s[i] * field
                if d_e <= 0.0 or u[c, t, i] < np.exp(-beta * d_e):
                    s[i] = -s[i]
        for i in range(n):
            out[c, i] = np.int8(1 if s[i] > 0 else -1)


def mcmc_sample(model: IsingModel, beta: float, count: int, chain_len: int, seed: int) -> SpinBatch:
    """One-shot-per-chain Metropolis sampling at inverse temperature ``beta``.

    Each chain starts from a uniform random state and is advanced
    ``chain_len`` full sweeps (spins visited in order 0..n-1); the final
    state is the sample.
    """
    if count < 1:
        raise ParameterError(f"count must be positive, got {count}", module=_MODULE)
    if chain_len < 1:
        raise ParameterError(f"chain_len must be >= 1, got {chain_len}", module=_MODULE)
    if not np.isfinite(beta) or beta < 0:
        raise ParameterError(f"beta must be finite and >= 0, got {beta}", module=_MODULE)
    n = model.n
    rows = chain_len + 1  # row 0 feeds the initial state
    block = max(1, min(count, _BLOCK_BYTES // (rows * n * 8)))
    out = np.empty((count, n), dtype=np.int8)
    for start in range(0, count, block):
        m = min(block, count - start)
        u = np.empty((m, rows, n))
        for c in range(m):
            u[c] = stream(seed, start + c).random((rows, n))
        _metropolis_chains(model.j, model.b, float(beta), u, out[start : start + m])
    return SpinBatch(samples=out, energies=batch_energies(model, out), model_key=model.key())


@njit(cache=True)
def _metropolis_trajectory(j, b, beta, u, weights):  # pragma: no cover - compiled
    rows, n = u.shape
    sweeps = rows - 1
    s = np.empty(n)
    for i in range(n):
        s[i] = 1.0 if u[0, i] < 0.5 else -1.0
    idx = np.empty(sweeps, dtype=np.int64)
    for t in range(1, sweeps + 1):
        for i in range(n):
            field = b[i]
            for k in range(n):
                field += j[i, k] * s[k]
            d_e = 2.0 * s[i] * field
            if d_e <= 0.0 or u[t, i] < np.exp(-beta * d_e):
                s[i] = -s[i]
        code = 0
        for i in range(n):
            if s[i] > 0:
                code += weights[i]
        idx[t - 1] = code
    return idx


def mcmc_trajectory(model: IsingModel, beta: float, sweeps: int, seed: int) -> np.ndarray:
    """State index after every sweep of a single long chain (diagnostics).

    Uses the same state encoding as the exact oracle; requires n <= 62.
    """
    if model.n > 62:
        raise ParameterError("trajectory encoding requires n <= 62", module=_MODULE)
    u = stream(seed, 0).random((sweeps + 1, model.n))
    weights = (1 << np.arange(model.n, dtype=np.int64))
    return _metropolis_trajectory(model.j, model.b, float(beta), u, weights)


def resolve_spec(spec: SamplerSpec, model: IsingModel) -> SamplerSpec:
    """Pin any model-dependent defaults (the simcim schedule) to ``model``.

    Temperature comparisons across scaled copies of a model must resolve the
    schedule once against the base model, then reuse it, because the default
    schedule normalizes its gain by the model's spectral scale.
    """
    if spec.kind == "simcim" and spec.schedule is None:
        from .simcim import default_schedule

        return SamplerSpec(
            kind=spec.kind,
            seed=spec.seed,
            beta=spec.beta,
            chain_len=spec.chain_len,
            schedule=default_schedule(model),
        )
    return spec


def draw(model: IsingModel, spec: SamplerSpec, count: int, seed: int | None = None) -> SpinBatch:
    """Draw a batch from the sampler's native distribution for ``model``."""
    if seed is None:
        seed = spec.seed
    if spec.kind == "uniform":
        batch = uniform_sample(model.n, count, seed)
        return SpinBatch(
            samples=batch.samples,
            energies=batch_energies(model, batch.samples),
            model_key=model.key(),
            target_beta=0.0,
        )
    if spec.kind == "mcmc":
        return mcmc_sample(model, spec.beta, count, spec.chain_len, seed)
    if spec.kind == "exact":
        from .exact import enumerate_states, exact_sample

        return exact_sample(enumerate_states(model, spec.beta), count, seed)
    # simcim
    from .simcim import anneal_batch

    resolved = resolve_spec(spec, model)
    return anneal_batch(model, resolved.schedule, count, seed)

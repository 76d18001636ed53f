"""Brute-force ground truth for small spin systems.

State encoding: bit k of a state index holds spin k, with bit 0 mapping to
spin -1 and bit 1 to spin +1. Histograms and log-probability vectors indexed
this way are portable across all modules.

Enumeration walks the 2^n state space in fixed-size chunks with a fixed
reduction order, so results are bit-stable regardless of how the chunks are
scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import CapacityError, DimensionError, ParameterError
from .ising import IsingModel, SpinBatch, batch_energies
from .rng import stream

_MODULE = "exact"

ENUM_CAP = 24  # 2^24 doubles is ~134 MB, a deliberate desk-scale ceiling
_CHUNK = 1 << 16
_STATE_CACHE_CAP = 18  # full +-1 state table cached up to 2^18 x 18 bytes


def decode_states(indices, n: int) -> np.ndarray:
    """Spin rows for state indices (bit k -> spin k, 0 maps to -1)."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


@lru_cache(maxsize=2)
def _full_state_table(n: int) -> np.ndarray:
    """Read-only decode of the whole state space; worth caching because
    enumeration is called once per training update."""
    table = decode_states(np.arange(1 << n, dtype=np.int64), n)
    table.setflags(write=False)
    return table


def _states_chunk(start: int, stop: int, n: int) -> np.ndarray:
    if n <= _STATE_CACHE_CAP:
        return _full_state_table(n)[start:stop]
    return decode_states(np.arange(start, stop, dtype=np.int64), n)


def encode_states(samples) -> np.ndarray:
    """Inverse of :func:`decode_states` for a (count, n) matrix of spins."""
    s = np.asarray(samples)
    n = s.shape[-1]
    weights = (1 << np.arange(n, dtype=np.int64))
    return ((s > 0).astype(np.int64) @ weights)


@dataclass(frozen=True)
class ExactDistribution:
    """Fully enumerated Boltzmann distribution p(s) = exp(-beta*E(s)) / Z."""

    model: IsingModel
    beta: float
    log_z: float
    log_probs: np.ndarray

    @property
    def n(self) -> int:
        return self.model.n


def all_energies(model: IsingModel, cap: int = ENUM_CAP) -> np.ndarray:
    """Energy of every state, indexed by the binary state encoding."""
    n = model.n
    if n > cap:
        raise CapacityError(f"n={n} exceeds exhaustive-search cap {cap}", module=_MODULE)
    total = 1 << n
    energies = np.empty(total)
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        energies[start:stop] = batch_energies(model, _states_chunk(start, stop, n))
    return energies


def enumerate_states(model: IsingModel, beta: float, cap: int = ENUM_CAP) -> ExactDistribution:
    """Exact partition function and per-state log-probabilities.

    ``beta`` = 0 yields the uniform distribution over all 2^n states.
    """
    beta = float(beta)
    if not np.isfinite(beta) or beta < 0:
        raise ParameterError(f"beta must be a finite non-negative real, got {beta}", module=_MODULE)
    energies = all_energies(model, cap=cap)
    neg = -beta * energies
    # chunked pairwise-style reduction: per-chunk logsumexp, then combine
    parts = [logsumexp(neg[s : s + _CHUNK]) for s in range(0, len(neg), _CHUNK)]
    log_z = float(logsumexp(parts))
    return ExactDistribution(model=model, beta=beta, log_z=log_z, log_probs=neg - log_z)


def exact_sample(dist: ExactDistribution, count: int, seed: int) -> SpinBatch:
    """``count`` i.i.d. draws from the enumerated distribution."""
    if count < 1:
        raise ParameterError(f"count must be positive, got {count}", module=_MODULE)
    rng = stream(seed)
    probs = np.exp(dist.log_probs)
    probs /= probs.sum()
    idx = rng.choice(len(probs), size=count, p=probs)
    samples = decode_states(idx, dist.n)
    return SpinBatch(
        samples=samples,
        energies=batch_energies(dist.model, samples),
        model_key=dist.model.key(),
        target_beta=dist.beta,
    )


def exact_moments(dist: ExactDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Expected spins and pairwise correlations under the exact distribution.

    Returns (mean_spin, correlation) with correlation[i][k] = <s_i s_k>;
    the diagonal is exactly 1.
    """
    n = dist.n
    probs = np.exp(dist.log_probs)
    mean = np.zeros(n)
    corr = np.zeros((n, n))
    for start in range(0, len(probs), _CHUNK):
        stop = min(start + _CHUNK, len(probs))
        s = _states_chunk(start, stop, n).astype(np.float64)
        p = probs[start:stop]
        mean += p @ s
        corr += s.T @ (s * p[:, None])
    np.fill_diagonal(corr, 1.0)
    return mean, corr


def state_histogram(batch: SpinBatch | np.ndarray, n: int) -> np.ndarray:
    """Counts over the 2^n state space from a batch of samples."""
    samples = batch.samples if isinstance(batch, SpinBatch) else np.asarray(batch)
    if samples.shape[-1] != n:
        raise DimensionError(f"samples have width {samples.shape[-1]}, expected {n}", module=_MODULE)
    idx = encode_states(samples)
    return np.bincount(idx, minlength=1 << n).astype(np.int64)


def exact_kl(p: ExactDistribution, q) -> float:
    """KL divergence D(p || q).

    ``q`` is either another :class:`ExactDistribution` on the same n or an
    empirical state histogram (counts of length 2^n, e.g. from
    :func:`state_histogram`). Empirical histograms get add-one (Laplace)
    smoothing over the full 2^n support so no state has probability zero.
    """
    if isinstance(q, ExactDistribution):
        if q.n != p.n:
            raise DimensionError(f"dimension mismatch: {p.n} vs {q.n}", module=_MODULE)
        log_q = q.log_probs
    else:
        counts = np.asarray(q, dtype=np.float64)
        if counts.shape != (1 << p.n,):
            raise DimensionError(
                f"histogram length {counts.shape} does not match 2^{p.n}", module=_MODULE
            )
        smoothed = counts + 1.0
        log_q = np.log(smoothed) - np.log(smoothed.sum())
    lp = p.log_probs
    probs = np.exp(lp)
    return float(np.sum(probs * (lp - log_q)))

"""Deterministic seeded random streams.

Every stochastic operation in boltzkit draws from a stream addressed by
(seed, path of integer indices). Streams are independent PCG64 generators
derived through ``numpy.random.SeedSequence`` spawn keys, so a batch built
run-by-run in serial is bit-identical to one built by parallel workers that
each own their run's stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import ParameterError


def _check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}", module="rng")
    return seed


def _path_part(part) -> int:
    """Path elements are integers; string labels hash to stable integers."""
    if isinstance(part, str):
        return int.from_bytes(hashlib.sha256(part.encode()).digest()[:4], "big")
    return int(part)


def stream(seed: int, *path) -> np.random.Generator:
    """Generator for the stream addressed by ``(seed, *path)``.

    ``stream(seed, i)`` is the dedicated stream of run/sample ``i`` within a
    batch seeded with ``seed``; deeper paths address nested stages and may
    mix integer indices with string stage labels.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=tuple(map(_path_part, path)))
    )


def substream_seed(seed: int, *path) -> int:
    """Derive an integer sub-seed for a child stage (itself a valid seed)."""
    ss = np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=tuple(map(_path_part, path)))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)  # keep it in int64 range

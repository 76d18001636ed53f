"""Shared fixtures: reference models, synthetic IDX files, hypothesis profile."""

from __future__ import annotations

import gzip
import re
import struct

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from boltzkit.ising import IsingModel, random_coupling_model

# one line per acceptance criterion, surfaced after the test summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    lines = list(ACCEPTANCE_LINES)
    reported = {re.search(r"criterion (\d+)", line).group(1) for line in lines}
    for key in ("failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            match = re.search(r"TestCriterion(\d+)", getattr(rep, "nodeid", ""))
            if match and match.group(1) not in reported:
                lines.append(f"[criterion {match.group(1)}] FAIL - {rep.nodeid}")
    if lines:
        lines.sort(key=lambda line: int(re.search(r"criterion (\d+)", line).group(1)))
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

# numba compilation on first use makes wall-clock deadlines meaningless
settings.register_profile(
    "boltzkit",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("boltzkit")


@pytest.fixture(scope="session")
def ferro2() -> IsingModel:
    """Two spins, ferromagnetic unit coupling, no bias."""
    j = np.array([[0.0, 1.0], [1.0, 0.0]])
    return IsingModel(j=j, b=np.zeros(2))


@pytest.fixture(scope="session")
def bench16() -> IsingModel:
    """The seeded 16-spin benchmark with {-1, 0, 1} couplings."""
    return random_coupling_model(16, seed=7)


@pytest.fixture(scope="session")
def small_random_model() -> IsingModel:
    """8 spins, continuous couplings, biases; enumerable in microseconds."""
    rng = np.random.default_rng(42)
    raw = rng.normal(0.0, 0.5, size=(8, 8))
    j = np.triu(raw, k=1)
    j = j + j.T
    return IsingModel(j=j, b=rng.normal(0.0, 0.3, size=8))


def write_idx_pair(directory, images: np.ndarray, labels: np.ndarray, gzipped=False):
    """Write a (count, 28, 28) uint8 image array and its labels as an IDX
    file pair; returns (images_path, labels_path)."""
    count = images.shape[0]
    img_bytes = struct.pack(">iiii", 0x00000803, count, 28, 28) + images.tobytes()
    lab_bytes = struct.pack(">ii", 0x00000801, count) + labels.astype(np.uint8).tobytes()
    suffix = ".gz" if gzipped else ""
    images_path = directory / f"images.idx{suffix}"
    labels_path = directory / f"labels.idx{suffix}"
    opener = gzip.open if gzipped else open
    with opener(images_path, "wb") as fh:
        fh.write(img_bytes)
    with opener(labels_path, "wb") as fh:
        fh.write(lab_bytes)
    return images_path, labels_path


@pytest.fixture()
def idx_pair(tmp_path):
    rng = np.random.default_rng(5)
    images = rng.integers(0, 256, size=(24, 28, 28), dtype=np.uint8)
    labels = rng.integers(0, 10, size=24, dtype=np.uint8)
    paths = write_idx_pair(tmp_path, images, labels)
    return paths, images, labels

"""Effective-temperature estimation from paired energy histograms.

For Boltzmann samples at two inverse temperatures beta1 and beta2 obtained
from the same model at coupling scales 1 and 1/r (so beta1/beta2 = r), the
difference of log-ratios of bin probabilities

    dl(E) = ln[c1(E)/c1(E')] - ln[c2(E)/c2(E')]

is (beta2 - beta1) * (E - E') independently of the density of states, which
cancels between the two sets. Fitting dl against dE therefore yields both
temperatures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CalibrationError, InsufficientOverlapError, ParameterError
from .ising import IsingModel, SpinBatch, ensure_energies, scale_model
from .rng import substream_seed
from .samplers import SamplerSpec, draw, resolve_spec

_MODULE = "thermometry"

DEFAULT_SCALE_RATIO = 0.76
DEFAULT_MIN_COUNT = 10
DEFAULT_BIN_COUNT = 50  # pooled range / 50 when no explicit bin width is given
MIN_BETA = 0.01  # below this the fitted slope is indistinguishable from beta = 0


@dataclass(frozen=True)
class EnergyHistogram:
    """Histogram over energy bins aligned to a global origin.

    Bin k (global index) covers [k*w, (k+1)*w), so histograms with the same
    width share bin identities regardless of the batches they came from.
    """

    bin_width: float
    first_bin: int
    counts: np.ndarray
    total: int

    @property
    def bin_edges(self) -> np.ndarray:
        k = self.first_bin + np.arange(len(self.counts) + 1)
        return k * self.bin_width

    def centers(self) -> np.ndarray:
        k = self.first_bin + np.arange(len(self.counts))
        return (k + 0.5) * self.bin_width


@dataclass(frozen=True)
class TemperatureEstimate:
    """Result of the two-scale log-ratio regression."""

    beta1: float
    beta2: float
    scale_ratio: float
    slope: float  # fitted beta2 - beta1
    r_squared: float
    points_used: int
    stderr: float = float("nan")
    model_key: str | None = None

    def to_dict(self) -> dict:
        return {
            "beta1": self.beta1,
            "beta2": self.beta2,
            "scale_ratio": self.scale_ratio,
            "slope": self.slope,
            "r_squared": self.r_squared,
            "points_used": self.points_used,
            "stderr": self.stderr,
            "model_key": self.model_key,
        }


def histogram_energies(batch: SpinBatch, model: IsingModel, bin_width: float) -> EnergyHistogram:
    """Histogram a batch's energies under ``model`` with origin-aligned bins."""
    if len(batch) == 0:
        raise ParameterError("cannot histogram an empty batch", module=_MODULE)
    if not np.isfinite(bin_width) or bin_width <= 0:
        raise ParameterError(f"bin_width must be positive, got {bin_width}", module=_MODULE)
    energies = ensure_energies(batch, model)
    k = np.floor(energies / bin_width).astype(np.int64)
    first = int(k.min())
    counts = np.bincount(k - first, minlength=int(k.max()) - first + 1).astype(np.int64)
    return EnergyHistogram(bin_width=float(bin_width), first_bin=first, counts=counts, total=len(batch))


def delta_log_ratio(
    h1: EnergyHistogram, h2: EnergyHistogram, min_count: int = DEFAULT_MIN_COUNT
) -> tuple[np.ndarray, np.ndarray]:
    """Paired (dE, dl) points from two histograms sharing bin geometry.

    The reference bin E' is the shared bin with the largest combined count
    among bins holding at least ``min_count`` samples in each histogram. It
    stays in the returned points as the anchor (0, 0): it is usually the
    best-populated bin by orders of magnitude, and dropping it would leave
    strongly peaked histograms (low temperatures especially) fitting a line
    through a handful of noisy tail bins.
    """
    if h1.bin_width != h2.bin_width:
        raise ParameterError("histograms must share bin geometry", module=_MODULE)
    if min_count < 1:
        raise ParameterError(f"min_count must be positive, got {min_count}", module=_MODULE)
    lo = min(h1.first_bin, h2.first_bin)
    hi = max(h1.first_bin + len(h1.counts), h2.first_bin + len(h2.counts))
    c1 = np.zeros(hi - lo, dtype=np.int64)
    c2 = np.zeros(hi - lo, dtype=np.int64)
    c1[h1.first_bin - lo : h1.first_bin - lo + len(h1.counts)] = h1.counts
    c2[h2.first_bin - lo : h2.first_bin - lo + len(h2.counts)] = h2.counts
    ok = (c1 >= min_count) & (c2 >= min_count)
    qualifying = np.flatnonzero(ok)
    if len(qualifying) < 3:
        raise InsufficientOverlapError(
            f"only {len(qualifying)} bins hold >= {min_count} samples in both sets; "
            "the histograms do not overlap enough for a log-ratio fit",
            module=_MODULE,
        )
    combined = c1[qualifying] + c2[qualifying]
    ref = qualifying[int(np.argmax(combined))]  # argmax takes the lowest index on ties
    w = h1.bin_width
    delta_e = (qualifying - ref) * w
    # totals cancel inside each histogram's own ratio; the ref entry is 0
    delta_l = (np.log(c1[qualifying]) - np.log(c1[ref])) - (
        np.log(c2[qualifying]) - np.log(c2[ref])
    )
    return delta_e.astype(np.float64), delta_l


def fit_slope(delta_e: np.ndarray, delta_l: np.ndarray, weights: np.ndarray | None = None):
    """Least-squares line dl = a + slope*dE; returns (slope, r_squared, stderr)."""
    x = np.asarray(delta_e, dtype=np.float64)
    y = np.asarray(delta_l, dtype=np.float64)
    if len(x) < 2:
        raise ParameterError("need at least 2 points to fit a slope", module=_MODULE)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=np.float64)
    wsum = w.sum()
    xm, ym = (w * x).sum() / wsum, (w * y).sum() / wsum
    sxx = (w * (x - xm) ** 2).sum()
    if sxx == 0.0:
        raise ParameterError("all points share one energy bin; slope undefined", module=_MODULE)
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = (w * resid**2).sum()
    ss_tot = (w * (y - ym) ** 2).sum()
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    dof = max(len(x) - 2, 1)
    stderr = float(np.sqrt((ss_res / dof) / sxx))
    return float(slope), float(r_squared), stderr


def solve_betas(slope: float, scale_ratio: float) -> tuple[float, float]:
    """Solve slope = beta2 - beta1 with beta1/beta2 = scale_ratio."""
    beta1 = slope * scale_ratio / (1.0 - scale_ratio)
    beta2 = slope / (1.0 - scale_ratio)
    return beta1, beta2


def estimate_beta(
    model: IsingModel,
    sampler: SamplerSpec,
    scale_ratio: float = DEFAULT_SCALE_RATIO,
    count: int = 50000,
    bin_width: float | None = None,
    min_count: int = DEFAULT_MIN_COUNT,
    seed: int | None = None,
    weighted: bool = True,
    min_beta: float = MIN_BETA,
) -> TemperatureEstimate:
    """Measure a sampler's effective inverse temperature on ``model``.

    Draws one batch from the model at unit scale (effective beta1) and one
    from the model scaled by 1/scale_ratio (effective beta2 = beta1 /
    scale_ratio), then fits the paired log-ratio points. The default
    weighted fit uses inverse-variance weights for the log-count
    differences, which keeps sparsely populated tail bins from dominating
    the regression noise.
    """
    if not (0.0 < scale_ratio < 1.0):
        raise ParameterError(f"scale_ratio must lie in (0, 1), got {scale_ratio}", module=_MODULE)
    if count < 1:
        raise ParameterError(f"count must be positive, got {count}", module=_MODULE)
    if seed is None:
        seed = sampler.seed
    sampler = resolve_spec(sampler, model)  # pin simcim schedule to the base model
    batch1 = draw(model, sampler, count, seed=substream_seed(seed, 0))
    batch2 = draw(scale_model(model, 1.0 / scale_ratio), sampler, count, seed=substream_seed(seed, 1))
    e1 = ensure_energies(batch1, model)
    e2 = ensure_energies(batch2, model)
    if bin_width is None:
        pooled = np.concatenate([e1, e2])
        span = float(pooled.max() - pooled.min())
        bin_width = span / DEFAULT_BIN_COUNT if span > 0 else 1.0
    h1 = histogram_energies(batch1, model, bin_width)
    h2 = histogram_energies(batch2, model, bin_width)
    delta_e, delta_l = delta_log_ratio(h1, h2, min_count=min_count)
    weights = None
    if weighted:
        weights = _inverse_variance_weights(h1, h2, delta_e, min_count)
    slope, r_squared, stderr = fit_slope(delta_e, delta_l, weights)
    beta1, beta2 = solve_betas(slope, scale_ratio)
    if not np.isfinite(beta1) or beta1 < min_beta:
        raise CalibrationError(
            f"fitted beta1 = {beta1:.4g} is not significantly positive; "
            "the sampler output does not look Boltzmann at a usable temperature",
            module=_MODULE,
        )
    return TemperatureEstimate(
        beta1=beta1,
        beta2=beta2,
        scale_ratio=float(scale_ratio),
        slope=slope,
        r_squared=r_squared,
        points_used=len(delta_e),
        stderr=stderr,
        model_key=model.key(),
    )


def _inverse_variance_weights(h1, h2, delta_e, min_count):
    # var of dl is the sum of 1/count over the four bins entering it
    lo = min(h1.first_bin, h2.first_bin)
    hi = max(h1.first_bin + len(h1.counts), h2.first_bin + len(h2.counts))
    c1 = np.zeros(hi - lo)
    c2 = np.zeros(hi - lo)
    c1[h1.first_bin - lo : h1.first_bin - lo + len(h1.counts)] = h1.counts
    c2[h2.first_bin - lo : h2.first_bin - lo + len(h2.counts)] = h2.counts
    ok = (c1 >= min_count) & (c2 >= min_count)
    qualifying = np.flatnonzero(ok)
    combined = c1[qualifying] + c2[qualifying]
    ref = qualifying[int(np.argmax(combined))]
    var = 1.0 / c1[qualifying] + 1.0 / c1[ref] + 1.0 / c2[qualifying] + 1.0 / c2[ref]
    return 1.0 / var


def delta_curve(
    batch1: SpinBatch,
    batch2: SpinBatch,
    model: IsingModel,
    bin_width: float | None = None,
    min_count: int = DEFAULT_MIN_COUNT,
) -> tuple[np.ndarray, np.ndarray]:
    """The paired (delta_e, delta_l) points two_batch_estimate would fit.

    Exposed so the fitted curve can be dumped alongside the estimate.
    """
    e1 = ensure_energies(batch1, model)
    e2 = ensure_energies(batch2, model)
    if bin_width is None:
        pooled = np.concatenate([e1, e2])
        span = float(pooled.max() - pooled.min())
        bin_width = span / DEFAULT_BIN_COUNT if span > 0 else 1.0
    h1 = histogram_energies(batch1, model, bin_width)
    h2 = histogram_energies(batch2, model, bin_width)
    return delta_log_ratio(h1, h2, min_count=min_count)


def two_batch_estimate(
    batch1: SpinBatch,
    batch2: SpinBatch,
    model: IsingModel,
    scale_ratio: float,
    bin_width: float | None = None,
    min_count: int = DEFAULT_MIN_COUNT,
    weighted: bool = True,
) -> TemperatureEstimate:
    """Fit a TemperatureEstimate from two already-drawn batches.

    ``batch1`` must come from unit scale and ``batch2`` from scale
    1/scale_ratio; energies are taken under ``model``.
    """
    e1 = ensure_energies(batch1, model)
    e2 = ensure_energies(batch2, model)
    if bin_width is None:
        pooled = np.concatenate([e1, e2])
        span = float(pooled.max() - pooled.min())
        bin_width = span / DEFAULT_BIN_COUNT if span > 0 else 1.0
    h1 = histogram_energies(batch1, model, bin_width)
    h2 = histogram_energies(batch2, model, bin_width)
    delta_e, delta_l = delta_log_ratio(h1, h2, min_count=min_count)
    weights = _inverse_variance_weights(h1, h2, delta_e, min_count) if weighted else None
    slope, r_squared, stderr = fit_slope(delta_e, delta_l, weights)
    beta1, beta2 = solve_betas(slope, scale_ratio)
    return TemperatureEstimate(
        beta1=beta1,
        beta2=beta2,
        scale_ratio=float(scale_ratio),
        slope=slope,
        r_squared=r_squared,
        points_used=len(delta_e),
        stderr=stderr,
        model_key=model.key(),
    )

"""Two-batch effective-temperature estimation."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boltzkit.errors import CalibrationError, InsufficientOverlapError, ParameterError
from boltzkit.ising import SpinBatch, scale_model
from boltzkit.samplers import SamplerSpec, draw
from boltzkit.thermometry import (
    EnergyHistogram,
    delta_curve,
    delta_log_ratio,
    estimate_beta,
    fit_slope,
    histogram_energies,
    solve_betas,
    two_batch_estimate,
)


def _hist(counts, first_bin=0, bin_width=1.0):
    counts = np.asarray(counts, dtype=np.int64)
    return EnergyHistogram(
        bin_width=bin_width, first_bin=first_bin, counts=counts, total=int(counts.sum())
    )


class TestHistogram:
    def test_origin_alignment(self, ferro2):
        """Bins are addressed globally, so batches with disjoint energy
        ranges still share bin identities."""
        up = SpinBatch(samples=np.array([[1, 1]], dtype=np.int8))
        anti = SpinBatch(samples=np.array([[1, -1]], dtype=np.int8))
        h_up = histogram_energies(up, ferro2, 0.5)  # E = -1
        h_anti = histogram_energies(anti, ferro2, 0.5)  # E = +1
        assert h_up.first_bin == -2
        assert h_anti.first_bin == 2
        assert h_up.bin_edges[0] == pytest.approx(-1.0)

    def test_counts_total(self, small_random_model):
        batch = draw(small_random_model, SamplerSpec(kind="uniform"), 500, seed=1)
        h = histogram_energies(batch, small_random_model, 0.7)
        assert h.counts.sum() == h.total == 500

    def test_bin_width_validation(self, ferro2):
        batch = SpinBatch(samples=np.array([[1, 1]], dtype=np.int8))
        with pytest.raises(ParameterError):
            histogram_energies(batch, ferro2, 0.0)


class TestDeltaLogRatio:
    def test_hand_computed_case(self):
        """Reference bin is the largest combined-count shared bin; it stays
        in the curve as the (0, 0) anchor, and each other point is the
        between-histogram difference of within-histogram log ratios."""
        h1 = _hist([100, 50, 20])
        h2 = _hist([100, 80, 60])
        delta_e, delta_l = delta_log_ratio(h1, h2, min_count=10)
        assert np.array_equal(delta_e, [0.0, 1.0, 2.0])
        expected1 = (np.log(50) - np.log(100)) - (np.log(80) - np.log(100))
        expected2 = (np.log(20) - np.log(100)) - (np.log(60) - np.log(100))
        assert delta_l == pytest.approx([0.0, expected1, expected2], abs=1e-12)

    def test_min_count_filters_bins(self):
        h1 = _hist([100, 50, 30, 3])
        h2 = _hist([100, 80, 70, 90])
        delta_e, delta_l = delta_log_ratio(h1, h2, min_count=10)
        assert np.array_equal(delta_e, [0.0, 1.0, 2.0])  # last bin dropped
        assert delta_l[0] == 0.0

    def test_insufficient_overlap(self):
        h1 = _hist([100, 0, 0, 0], first_bin=0)
        h2 = _hist([100], first_bin=3)
        with pytest.raises(InsufficientOverlapError):
            delta_log_ratio(h1, h2, min_count=10)

    def test_mismatched_bin_width_rejected(self):
        with pytest.raises(ParameterError):
            delta_log_ratio(_hist([10, 10, 10]), _hist([10, 10, 10], bin_width=0.5))


class TestFitSlope:
    def test_recovers_exact_line(self):
        x = np.array([0.0, 1.0, 2.0, 3.0])
        y = 0.3 * x - 0.7
        slope, r_squared, stderr = fit_slope(x, y)
        assert slope == pytest.approx(0.3, abs=1e-12)
        assert r_squared == pytest.approx(1.0, abs=1e-12)
        assert stderr == pytest.approx(0.0, abs=1e-9)

    def test_weights_shift_the_fit(self):
        x = np.array([0.0, 1.0, 2.0])
        y = np.array([0.0, 1.0, 4.0])  # kink at the last point
        flat = fit_slope(x, y, weights=np.array([1.0, 1.0, 1e-9]))[0]
        assert flat == pytest.approx(1.0, abs=1e-6)

    def test_degenerate_input_rejected(self):
        with pytest.raises(ParameterError):
            fit_slope(np.array([1.0]), np.array([2.0]))
        with pytest.raises(ParameterError):
            fit_slope(np.array([1.0, 1.0]), np.array([0.0, 1.0]))


class TestSolveBetas:
    @given(
        slope=st.floats(min_value=0.01, max_value=10, allow_nan=False),
        ratio=st.floats(min_value=0.05, max_value=0.95, allow_nan=False),
    )
    def test_algebra(self, slope, ratio):
        beta1, beta2 = solve_betas(slope, ratio)
        assert beta2 - beta1 == pytest.approx(slope, rel=1e-9)
        assert beta1 / beta2 == pytest.approx(ratio, rel=1e-9)


class TestEstimateBeta:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_recovers_known_temperature(self, bench16, beta):
        """Exact-oracle pairs on the benchmark recover beta within 5%."""
        est = estimate_beta(
            bench16,
            SamplerSpec(kind="exact", beta=beta),
            scale_ratio=0.76,
            count=50000,
            seed=123,
        )
        assert est.beta1 == pytest.approx(beta, rel=0.05)
        assert est.r_squared >= 0.99
        assert est.model_key == bench16.key()

    def test_seed_determinism(self, bench16):
        a = estimate_beta(bench16, SamplerSpec(kind="exact", beta=1.0), count=2000, seed=5)
        b = estimate_beta(bench16, SamplerSpec(kind="exact", beta=1.0), count=2000, seed=5)
        assert a == b

    def test_flat_sampler_fails_calibration(self, bench16):
        """A uniform (infinite temperature) sampler has no usable slope."""
        with pytest.raises(CalibrationError):
            estimate_beta(
                bench16, SamplerSpec(kind="uniform"), count=20000, seed=3, min_beta=0.01
            )

    def test_scale_ratio_validation(self, bench16):
        with pytest.raises(ParameterError):
            estimate_beta(bench16, SamplerSpec(kind="exact"), scale_ratio=1.0)

    def test_matches_two_batch_estimate(self, bench16):
        """estimate_beta is exactly the two-batch fit on its own draws."""
        from boltzkit.rng import substream_seed

        spec = SamplerSpec(kind="exact", beta=1.0)
        seed = 17
        est = estimate_beta(bench16, spec, scale_ratio=0.76, count=5000, seed=seed)
        b1 = draw(bench16, spec, 5000, seed=substream_seed(seed, 0))
        b2 = draw(scale_model(bench16, 1 / 0.76), spec, 5000, seed=substream_seed(seed, 1))
        manual = two_batch_estimate(b1, b2, bench16, 0.76)
        assert est.beta1 == pytest.approx(manual.beta1, rel=1e-12)

    def test_mcmc_cross_check(self, bench16):
        """An honest Boltzmann sampler at beta=1 reads back near 1."""
        est = estimate_beta(
            bench16,
            SamplerSpec(kind="mcmc", beta=1.0, chain_len=80),
            count=20000,
            seed=7,
        )
        assert est.beta1 == pytest.approx(1.0, rel=0.10)


class TestDeltaCurve:
    def test_consistent_with_estimate(self, bench16):
        spec = SamplerSpec(kind="exact", beta=1.0)
        b1 = draw(bench16, spec, 5000, seed=1)
        b2 = draw(scale_model(bench16, 1 / 0.76), spec, 5000, seed=2)
        delta_e, delta_l = delta_curve(b1, b2, bench16)
        est = two_batch_estimate(b1, b2, bench16, 0.76, weighted=False)
        slope, r_squared, _ = fit_slope(delta_e, delta_l)
        assert slope == pytest.approx(est.slope, rel=1e-12)
        assert len(delta_e) == est.points_used

"""Fully visible Boltzmann machine training and classification."""

import numpy as np
import pytest

from boltzkit.bm import (
    BmTrainConfig,
    BmTrainState,
    avg_log_likelihood,
    bm_update,
    classification_accuracy,
    classify,
    classify_batch,
    dataset_kl,
    generate,
    label_block,
    positive_phase,
    random_init,
    save_checkpoint,
    train,
)
from boltzkit.datasets import MNIST_PIXELS, MNIST_SPINS, SpinDataset, bas_dataset
from boltzkit.errors import DimensionError, ParameterError
from boltzkit.exact import enumerate_states, exact_moments
from boltzkit.ising import IsingModel, energy, load_model
from boltzkit.rng import stream
from boltzkit.simcim import AnnealSchedule


def random_dataset(n, rows, seed):
    rng = stream(seed)
    samples = rng.choice(np.array([-1, 1], dtype=np.int8), size=(rows, n))
    weights = rng.integers(1, 4, size=rows)
    return SpinDataset(samples=samples, weights=weights)


def analytic_gradient(model, dataset):
    """(dL/dJ pair, dL/db) of the average log-likelihood."""
    pos_corr, pos_mean = positive_phase(dataset)
    mean, corr = exact_moments(enumerate_states(model, 1.0))
    corr = corr.copy()
    np.fill_diagonal(corr, 0.0)
    return pos_corr - corr, pos_mean - mean


def loglik_at(model, dataset):
    return avg_log_likelihood(model, dataset, enumerate_states(model, 1.0).log_z)


class TestGradient:
    def test_matches_central_differences(self):
        """Perturbing a symmetric coupling pair (or a bias) and differencing
        the exact average log-likelihood reproduces the moment-difference
        gradient used by the update rule."""
        n = 5
        rng = stream(77)
        raw = rng.normal(0.0, 0.4, size=(n, n))
        j = np.triu(raw, k=1)
        model = IsingModel(j=j + j.T, b=rng.normal(0.0, 0.3, size=n))
        dataset = random_dataset(n, 6, seed=3)
        grad_j, grad_b = analytic_gradient(model, dataset)
        h = 1e-5
        for i in range(n):
            for k in range(i + 1, n):
                jp = model.j.copy()
                jp[i, k] += h
                jp[k, i] += h
                jm = model.j.copy()
                jm[i, k] -= h
                jm[k, i] -= h
                numeric = (
                    loglik_at(IsingModel(j=jp, b=model.b), dataset)
                    - loglik_at(IsingModel(j=jm, b=model.b), dataset)
                ) / (2 * h)
                assert numeric == pytest.approx(grad_j[i, k], rel=1e-6, abs=1e-9)
        for i in range(n):
            bp = model.b.copy()
            bp[i] += h
            bm = model.b.copy()
            bm[i] -= h
            numeric = (
                loglik_at(IsingModel(j=model.j, b=bp), dataset)
                - loglik_at(IsingModel(j=model.j, b=bm), dataset)
            ) / (2 * h)
            assert numeric == pytest.approx(grad_b[i], rel=1e-6, abs=1e-9)

    def test_gradient_on_aligned_data(self, ferro2):
        """The two aligned states have data correlation 1, so the coupling
        gradient is exactly 1 - tanh(1) and the bias gradient vanishes by
        symmetry."""
        aligned = SpinDataset(
            samples=np.array([[1, 1], [-1, -1]], dtype=np.int8),
            weights=np.array([1, 1]),
        )
        grad_j, grad_b = analytic_gradient(ferro2, aligned)
        # data correlation is 1, model correlation tanh(1) < 1: push up
        assert grad_j[0, 1] == pytest.approx(1.0 - np.tanh(1.0), abs=1e-12)
        assert grad_b == pytest.approx([0.0, 0.0], abs=1e-12)


class TestPhases:
    def test_positive_phase_weighted(self):
        data = SpinDataset(
            samples=np.array([[1, 1], [1, -1]], dtype=np.int8),
            weights=np.array([3, 1]),
        )
        corr, mean = positive_phase(data)
        assert mean == pytest.approx([1.0, 0.5])
        assert corr[0, 1] == pytest.approx(0.5)
        assert corr[1, 0] == pytest.approx(0.5)
        assert corr[0, 0] == 0.0 and corr[1, 1] == 0.0

    def test_positive_phase_plain_array(self):
        rows = np.array([[1, -1], [-1, -1], [1, -1]], dtype=np.int8)
        corr, mean = positive_phase(rows)
        assert mean == pytest.approx([1 / 3, -1.0])
        assert corr[0, 1] == pytest.approx(-1 / 3)

    def test_positive_phase_empty_rejected(self):
        with pytest.raises(DimensionError):
            positive_phase(np.empty((0, 3)))

    def test_update_hand_case(self, ferro2):
        """One exact update from the ferromagnet with an all-up minibatch."""
        state = BmTrainState(model=ferro2)
        config = BmTrainConfig(learning_rate=0.05, negative_phase="exact")
        new = bm_update(state, np.array([[1, 1]], dtype=np.int8), config)
        t = np.tanh(1.0)
        assert new.model.j[0, 1] == pytest.approx(1.0 + 0.05 * (1.0 - t), abs=1e-12)
        assert new.model.b == pytest.approx([0.05, 0.05], abs=1e-12)
        assert new.update_count == 1

    def test_update_dimension_mismatch(self, ferro2):
        state = BmTrainState(model=ferro2)
        config = BmTrainConfig()
        with pytest.raises(DimensionError):
            bm_update(state, np.ones((2, 3), dtype=np.int8), config)


class TestMetrics:
    def test_avg_log_likelihood_manual(self, ferro2):
        data = SpinDataset(
            samples=np.array([[1, 1], [1, -1]], dtype=np.int8),
            weights=np.array([3, 1]),
        )
        log_z = np.log(2 * np.e + 2 / np.e)
        expected = (3 * (1.0 - log_z) + 1 * (-1.0 - log_z)) / 4
        assert avg_log_likelihood(ferro2, data, float(log_z)) == pytest.approx(
            expected, abs=1e-12
        )

    def test_dataset_kl_hand_value(self, ferro2):
        data = SpinDataset(
            samples=np.array([[1, 1], [-1, -1]], dtype=np.int8),
            weights=np.array([3, 1]),
        )
        dist = enumerate_states(ferro2, 1.0)
        log_q_aligned = 1.0 - np.log(2 * np.e + 2 / np.e)
        expected = 0.75 * (np.log(0.75) - log_q_aligned) + 0.25 * (
            np.log(0.25) - log_q_aligned
        )
        assert dataset_kl(data, dist) == pytest.approx(float(expected), abs=1e-12)

    def test_dataset_kl_nonnegative(self, small_random_model):
        data = random_dataset(8, 12, seed=5)
        dist = enumerate_states(small_random_model, 1.0)
        assert dataset_kl(data, dist) >= 0.0

    def test_dataset_kl_zero_for_matching_uniform(self):
        model = IsingModel(j=np.zeros((2, 2)), b=np.zeros(2))
        data = SpinDataset(
            samples=np.array(
                [[-1, -1], [-1, 1], [1, -1], [1, 1]], dtype=np.int8
            ),
            weights=np.ones(4, dtype=np.int64),
        )
        assert dataset_kl(data, enumerate_states(model, 1.0)) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_dataset_kl_dimension_mismatch(self, ferro2):
        data = random_dataset(3, 4, seed=1)
        with pytest.raises(DimensionError):
            dataset_kl(data, enumerate_states(ferro2, 1.0))


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"learning_rate": 0.0},
            {"learning_rate": -0.1},
            {"learning_rate": float("nan")},
            {"epochs": 0},
            {"minibatch_size": 0},
            {"negative_phase": "gibbs"},
            {"negative_samples": 0},
            {"metric_cadence": 0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ParameterError):
            BmTrainConfig(**kwargs)

    def test_random_init(self):
        model = random_init(6, seed=3)
        assert np.array_equal(model.j, model.j.T)
        assert np.all(np.diag(model.j) == 0.0)
        assert np.all(model.b == 0.0)
        assert np.array_equal(model.j, random_init(6, seed=3).j)
        assert not np.array_equal(model.j, random_init(6, seed=4).j)


class TestTrain:
    def test_loglik_improves_on_bas(self):
        data = bas_dataset()
        config = BmTrainConfig(
            learning_rate=0.05, epochs=30, negative_phase="exact", metric_cadence=10
        )
        init = random_init(16, seed=0)
        before = loglik_at(init, data)
        state = train(data, config, init=init, eval_fn=lambda m: {"ll": loglik_at(m, data)})
        updates = [u for u, _ in state.history]
        assert updates == [10, 20, 30]
        values = [m["ll"] for _, m in state.history]
        assert values[-1] > before
        assert values[-1] > values[0]

    def test_train_deterministic(self):
        data = bas_dataset()
        config = BmTrainConfig(learning_rate=0.05, epochs=5, negative_phase="exact", seed=2)
        a = train(data, config)
        b = train(data, config)
        assert np.array_equal(a.model.j, b.model.j)
        assert np.array_equal(a.model.b, b.model.b)

    def test_minibatch_update_count(self):
        data = bas_dataset()  # 30 distinct rows
        config = BmTrainConfig(
            learning_rate=0.01, epochs=2, minibatch_size=8, negative_phase="exact", seed=0
        )
        state = train(data, config)
        assert state.update_count == 8  # ceil(30 / 8) = 4 updates per epoch

    def test_full_batch_update_count(self):
        data = bas_dataset()
        config = BmTrainConfig(learning_rate=0.01, epochs=3, negative_phase="exact")
        assert train(data, config).update_count == 3

    def test_on_update_called_every_update(self):
        data = bas_dataset()
        seen = []
        config = BmTrainConfig(learning_rate=0.01, epochs=4, negative_phase="exact")
        train(data, config, on_update=lambda s: seen.append(s.update_count))
        assert seen == [1, 2, 3, 4]

    def test_final_evaluation_appended_once(self):
        data = bas_dataset()
        config = BmTrainConfig(
            learning_rate=0.01, epochs=5, negative_phase="exact", metric_cadence=2
        )
        state = train(data, config, eval_fn=lambda m: {"x": 0.0})
        assert [u for u, _ in state.history] == [2, 4, 5]

    def test_init_mismatch_rejected(self):
        data = bas_dataset()
        with pytest.raises(DimensionError):
            train(data, BmTrainConfig(), init=random_init(4, seed=0))

    def test_mcmc_negative_phase_runs(self):
        data = bas_dataset()
        config = BmTrainConfig(
            learning_rate=0.02,
            epochs=2,
            negative_phase="mcmc",
            negative_samples=50,
            chain_len=40,
            seed=5,
        )
        state = train(data, config)
        assert np.all(np.isfinite(state.model.j))
        assert state.update_count == 2

    def test_simcim_negative_phase_runs(self):
        data = bas_dataset()
        config = BmTrainConfig(
            learning_rate=0.02,
            epochs=2,
            negative_phase="simcim",
            negative_samples=60,
            seed=5,
        )
        state = train(data, config)
        assert np.all(np.isfinite(state.model.j))


class TestClassification:
    def test_label_block(self):
        block = label_block(3)
        assert block[3] == 1
        assert block.sum() == -8
        with pytest.raises(ParameterError):
            label_block(10)
        with pytest.raises(ParameterError):
            label_block(-1)

    def test_classify_matches_brute_force(self):
        rng = stream(31)
        raw = rng.normal(0.0, 0.05, size=(MNIST_SPINS, MNIST_SPINS))
        j = np.triu(raw, k=1)
        model = IsingModel(j=j + j.T, b=rng.normal(0.0, 0.05, size=MNIST_SPINS))
        bitmaps = rng.choice(
            np.array([-1, 1], dtype=np.int8), size=(3, MNIST_PIXELS)
        )
        predicted = classify_batch(model, bitmaps)
        for row, pred in zip(bitmaps, predicted):
            energies = []
            for digit in range(10):
                full = np.concatenate([row, label_block(digit)])
                energies.append(energy(model, full))
            assert pred == int(np.argmin(energies))

    def test_ties_break_to_smallest_digit(self):
        model = IsingModel(j=np.zeros((MNIST_SPINS, MNIST_SPINS)), b=np.zeros(MNIST_SPINS))
        bitmap = np.ones(MNIST_PIXELS, dtype=np.int8)
        assert classify(model, bitmap) == 0

    def test_biased_model_accuracy(self):
        b = np.zeros(MNIST_SPINS)
        b[MNIST_PIXELS + 2] = 10.0  # digit 2 always wins
        model = IsingModel(j=np.zeros((MNIST_SPINS, MNIST_SPINS)), b=b)
        rng = stream(8)
        pixels = rng.choice(np.array([-1, 1], dtype=np.int8), size=(4, MNIST_PIXELS))
        labels = np.array([2, 2, 1, 0])
        from boltzkit.datasets import one_hot_block

        data = SpinDataset(
            samples=np.concatenate([pixels, one_hot_block(labels)], axis=1),
            weights=np.ones(4, dtype=np.int64),
            labels=labels,
        )
        assert classification_accuracy(model, data) == pytest.approx(0.5)

    def test_accuracy_requires_labels(self):
        model = IsingModel(j=np.zeros((MNIST_SPINS, MNIST_SPINS)), b=np.zeros(MNIST_SPINS))
        data = SpinDataset(
            samples=np.ones((2, MNIST_SPINS), dtype=np.int8),
            weights=np.ones(2, dtype=np.int64),
        )
        with pytest.raises(ParameterError):
            classification_accuracy(model, data)

    def test_wrong_model_size_rejected(self, ferro2):
        with pytest.raises(DimensionError):
            classify_batch(ferro2, np.ones((1, MNIST_PIXELS), dtype=np.int8))

    def test_wrong_bitmap_width_rejected(self):
        model = IsingModel(j=np.zeros((MNIST_SPINS, MNIST_SPINS)), b=np.zeros(MNIST_SPINS))
        with pytest.raises(DimensionError):
            classify_batch(model, np.ones((1, 100), dtype=np.int8))


class TestGenerate:
    SCHEDULE = AnnealSchedule(iterations=60, zeta=0.1, sigma=0.05)

    def test_shape_and_values(self):
        b = np.zeros(MNIST_SPINS)
        b[:MNIST_PIXELS] = 2.0
        model = IsingModel(j=np.zeros((MNIST_SPINS, MNIST_SPINS)), b=b)
        batch = generate(model, digit=4, schedule=self.SCHEDULE, count=6, seed=1)
        assert batch.samples.shape == (6, MNIST_PIXELS)
        assert np.all(np.abs(batch.samples) == 1)
        # strong positive pixel biases dominate the anneal
        assert batch.samples.mean() > 0.9

    def test_label_clamp_steers_coupled_pixel(self):
        j = np.zeros((MNIST_SPINS, MNIST_SPINS))
        j[0, MNIST_PIXELS + 7] = 5.0
        j[MNIST_PIXELS + 7, 0] = 5.0
        model = IsingModel(j=j, b=np.zeros(MNIST_SPINS))
        with_digit = generate(model, digit=7, schedule=self.SCHEDULE, count=10, seed=2)
        without = generate(model, digit=3, schedule=self.SCHEDULE, count=10, seed=2)
        assert with_digit.samples[:, 0].mean() > 0.8
        assert without.samples[:, 0].mean() < -0.8

    def test_bad_digit_rejected(self):
        model = IsingModel(j=np.zeros((MNIST_SPINS, MNIST_SPINS)), b=np.zeros(MNIST_SPINS))
        with pytest.raises(ParameterError):
            generate(model, digit=12, schedule=self.SCHEDULE, count=1, seed=0)

    def test_wrong_model_size_rejected(self, ferro2):
        with pytest.raises(DimensionError):
            generate(ferro2, digit=0, schedule=self.SCHEDULE, count=1, seed=0)


class TestCheckpoint:
    def test_name_format_and_round_trip(self, tmp_path, ferro2):
        state = BmTrainState(model=ferro2, update_count=7)
        path = save_checkpoint(state, tmp_path / "ckpt", stem="model")
        assert path.name == "model_000007.json"
        loaded = load_model(path)
        assert np.array_equal(loaded.j, ferro2.j)
        assert np.array_equal(loaded.b, ferro2.b)

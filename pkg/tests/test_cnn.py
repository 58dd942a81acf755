"""Filter-bank CNN: convolution semantics, gradients, training, persistence."""

import numpy as np
import pytest

from signet import cnn, nn
from signet.cnn import (
    ConvFilterBank,
    adjacency_bank,
    adjacency_mode_forward,
    average_pool,
    convolve,
    forward,
    load_cnn,
    represent,
    save_cnn,
    train,
)


def toy_matrices(n=60, rows=3, k=4, seed=0):
    """Class 1 inputs carry a positive offset in their first row."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, rows, k)) * 0.3
    y = rng.integers(0, 2, n)
    X[y == 1, 0, :] += 0.8
    return X, y


class TestConvolve:
    def test_hand_computed_windows(self):
        W = np.array([[1.0, -1.0]])
        X = np.array([[2.0, 1.0], [0.5, 1.0], [3.0, 0.0]])
        h = convolve(W, 0.5, X, activation="linear")
        assert np.allclose(h, [1.5, 0.0, 3.5])

    def test_relu_clips(self):
        W = np.array([[1.0, 0.0]])
        X = np.array([[-2.0, 0.0], [4.0, 0.0]])
        assert np.allclose(convolve(W, 0.0, X), [0.0, 4.0])

    def test_width_two_frobenius_product(self):
        W = np.ones((2, 2))
        X = np.arange(6.0).reshape(3, 2)
        h = convolve(W, 0.0, X, activation="linear")
        assert np.allclose(h, [0 + 1 + 2 + 3, 2 + 3 + 4 + 5])

    @pytest.mark.parametrize("s", [1, 2])
    def test_output_length(self, s):
        rows = 2 * s + 1
        X = np.random.default_rng(0).standard_normal((rows, 5))
        for m in range(1, rows + 1):
            W = np.zeros((m, 5))
            assert convolve(W, 0.0, X).shape == (rows - m + 1,)

    def test_width_exceeds_rows(self):
        with pytest.raises(ValueError, match="width"):
            convolve(np.zeros((4, 2)), 0.0, np.zeros((3, 2)))

    def test_column_mismatch(self):
        with pytest.raises(ValueError, match="columns"):
            convolve(np.zeros((1, 2)), 0.0, np.zeros((3, 5)))


class TestAveragePool:
    def test_mean(self):
        assert average_pool(np.array([1.0, 2.0, 6.0])) == 3.0

    def test_empty(self):
        with pytest.raises(ValueError):
            average_pool(np.array([]))


class TestBankConstruction:
    def test_even_split(self):
        bank = ConvFilterBank(3, 4, widths=(1, 2, 3), filters=6, seed=0)
        assert bank.per_width == 2
        assert [w.shape for w in bank.W] == [(2, 1, 4), (2, 2, 4), (2, 3, 4)]
        assert bank.filters == 6

    def test_uneven_split_rejected(self):
        with pytest.raises(ValueError, match="evenly"):
            ConvFilterBank(3, 4, widths=(1, 2), filters=5)

    def test_width_bounds(self):
        with pytest.raises(ValueError, match="widths"):
            ConvFilterBank(3, 4, widths=(4,), filters=4)
        with pytest.raises(ValueError):
            ConvFilterBank(3, 4, widths=(), filters=4)


class TestRepresentation:
    def test_matches_scalar_convolve(self):
        """Vectorized batch path must agree with the window-by-window loop."""
        rng = np.random.default_rng(7)
        bank = ConvFilterBank(3, 4, widths=(1, 2, 3), filters=6, seed=1)
        Xb = rng.standard_normal((5, 3, 4))
        Z = bank._represent(Xb)
        for b in range(5):
            expect = []
            for wi in range(len(bank.widths)):
                for f in range(bank.per_width):
                    h = convolve(bank.W[wi][f], bank.b[wi][f], Xb[b])
                    expect.append(average_pool(h))
            assert np.allclose(Z[b], expect, atol=1e-12)

    def test_represent_length(self):
        bank = ConvFilterBank(3, 4, widths=(1, 2, 3), filters=6)
        z = represent(bank, np.zeros((3, 4)))
        assert z.shape == (6,)

    def test_probability_rows(self):
        bank = ConvFilterBank(3, 4, widths=(1,), filters=4, seed=0)
        X, _ = toy_matrices(8)
        P = bank.predict_proba(X)
        assert P.shape == (8, 2)
        assert np.allclose(P.sum(axis=1), 1.0)

    def test_single_input_promoted(self):
        bank = ConvFilterBank(3, 4, widths=(1,), filters=4)
        X, _ = toy_matrices(2)
        single = forward(bank, X[0])
        batch = bank.predict_proba(X)
        assert np.allclose(single, batch[0])

    def test_shape_rejected(self):
        bank = ConvFilterBank(3, 4, widths=(1,), filters=4)
        with pytest.raises(ValueError, match="expected"):
            bank.predict_proba(np.zeros((5, 2, 4)))

    def test_filter_permutation_equivariance(self):
        # permuting filters inside a width block (with the matching head
        # columns) must leave the classifier unchanged
        bank = ConvFilterBank(3, 4, widths=(2,), filters=4, seed=3)
        X, _ = toy_matrices(6)
        before = bank.predict_proba(X)
        perm = np.array([2, 0, 3, 1])
        bank.W[0] = bank.W[0][perm]
        bank.b[0] = bank.b[0][perm]
        bank.head.U = bank.head.U[:, perm]
        assert np.allclose(bank.predict_proba(X), before, atol=1e-12)


class TestGradients:
    def test_grad_check_all_widths(self):
        X, y = toy_matrices(6)
        for seed in range(5):
            bank = ConvFilterBank(3, 4, widths=(1, 2, 3), filters=6, seed=seed)
            assert nn.grad_check(bank, X, y) < 1e-5

    def test_grads_zeroed_between_calls(self):
        X, y = toy_matrices(6)
        bank = ConvFilterBank(3, 4, widths=(1, 2), filters=4, seed=0)
        bank.loss_and_grads(X, y)
        first = [g.copy() for g in bank.grads()]
        bank.loss_and_grads(X, y)
        for a, b in zip(first, bank.grads()):
            assert np.array_equal(a, b)


class TestAdjacencyMode:
    def test_equals_dense_relu_layer(self):
        # 1 x n input under width-1 filters is exactly a dense relu layer
        bank = adjacency_bank(10, filters=8, seed=2)
        layer = nn.DenseLayer(np.random.default_rng(0), 10, 8, activation="relu")
        layer.W[...] = bank.W[0].reshape(8, 10)
        layer.b[...] = bank.b[0]
        row = np.random.default_rng(1).standard_normal(10)
        z = represent(bank, row[None, :])
        assert np.allclose(z, layer.apply(row[None, :])[0], atol=1e-12)

    def test_forward_validations(self):
        bank = adjacency_bank(6, filters=4)
        with pytest.raises(ValueError, match="length-6"):
            adjacency_mode_forward(bank, np.zeros(5))
        matrix_bank = ConvFilterBank(3, 4, widths=(1,), filters=4)
        with pytest.raises(ValueError, match="adjacency"):
            adjacency_mode_forward(matrix_bank, np.zeros(4))

    def test_probabilities(self):
        bank = adjacency_bank(6, filters=4, seed=1)
        p = adjacency_mode_forward(bank, np.array([0.0, 1.0, -1.0, 0.0, 1.0, 0.0]))
        assert p.shape == (2,)
        assert np.isclose(p.sum(), 1.0)


class TestTraining:
    def test_learns_toy_pattern(self):
        X, y = toy_matrices(80, seed=3)
        bank = ConvFilterBank(3, 4, widths=(1, 2, 3), filters=6, seed=0)
        train(bank, X, y, nn.TrainConfig(epochs=300, seed=0,
                                         validation_fraction=0.0))
        acc = np.mean(np.argmax(bank.predict_proba(X), axis=1) == y)
        assert acc >= 0.95
        assert bank.trained

    def test_deterministic(self):
        X, y = toy_matrices(30, seed=5)
        outs = []
        for _ in range(2):
            bank = ConvFilterBank(3, 4, widths=(1, 2), filters=4, seed=8)
            train(bank, X, y, nn.TrainConfig(epochs=10, seed=2))
            outs.append(bank.predict_proba(X))
        assert np.array_equal(outs[0], outs[1])


class TestPersistence:
    def test_round_trip(self, tmp_path):
        X, y = toy_matrices(20)
        bank = ConvFilterBank(3, 4, widths=(1, 2, 3), filters=6, seed=4)
        train(bank, X, y, nn.TrainConfig(epochs=5, seed=0))
        path = tmp_path / "cnn.npz"
        save_cnn(bank, path, extra_meta={"input_mode": "spectral-matrix"})
        loaded, meta = load_cnn(path)
        assert np.array_equal(loaded.predict_proba(X), bank.predict_proba(X))
        assert meta["input_mode"] == "spectral-matrix"
        assert loaded.trained

    def test_kind_checked(self, tmp_path):
        path = tmp_path / "other.npz"
        nn.save_checkpoint(path, "dae", {"W": np.zeros(2)}, {})
        with pytest.raises(ValueError, match="dae"):
            load_cnn(path)

"""Contrastive loss: closed forms, identities, and gradient checks."""

import math

import numpy as np
import pytest

from gradcheck import assert_grad_close, central_diff
from wingfuse import errors
from wingfuse.objective import contrastive_loss, loss_gradient


class TestClosedForms:
    def test_uniform_row_loss_is_log_class_count(self):
        for n_classes in (2, 16, 46):
            s = np.full((3, n_classes), 0.37)
            labels = np.array([0, 1, 0]) % n_classes
            assert abs(contrastive_loss(s, labels, 0.1) - math.log(n_classes)) < 1e-9

    def test_two_class_scalar_value(self):
        # closed form: -log(e^{10}/(e^{10}+e^{0})) = log(1 + e^{-10})
        s = np.array([[1.0, 0.0]])
        loss = contrastive_loss(s, np.array([0]), 0.1)
        assert abs(loss - 4.5398899216870535e-05) < 1e-15

    def test_temperature_scaling_identity(self):
        rng = np.random.default_rng(20)
        s = rng.uniform(-1, 1, (5, 7))
        labels = rng.integers(0, 7, size=5)
        for tau in (0.1, 0.01, 0.001):
            a = contrastive_loss(s, labels, tau)
            b = contrastive_loss(s / tau, labels, 1.0)
            assert abs(a - b) < 1e-9

    def test_per_row_shift_invariance(self):
        rng = np.random.default_rng(21)
        s = rng.uniform(-1, 1, (6, 4))
        labels = rng.integers(0, 4, size=6)
        shifted = s + rng.standard_normal((6, 1))
        assert abs(
            contrastive_loss(s, labels, 0.1) - contrastive_loss(shifted, labels, 0.1)
        ) < 1e-9

    def test_loss_nonnegative_and_vanishes_with_margin(self):
        labels = np.array([0])
        margins = [2.0, 20.0, 200.0]
        losses = [
            contrastive_loss(np.array([[m, 0.0]]), labels, 1.0) for m in margins
        ]
        assert all(l >= 0.0 for l in losses)
        assert losses[0] > losses[1] > losses[2] >= 0.0
        assert losses[2] < 1e-80

    def test_monotone_in_true_class_logit(self):
        labels = np.array([1])
        lo = contrastive_loss(np.array([[0.3, 0.1, -0.2]]), labels, 0.1)
        hi = contrastive_loss(np.array([[0.3, 0.5, -0.2]]), labels, 0.1)
        assert hi < lo

    def test_stable_at_tiny_temperature(self):
        s = np.array([[1.0, -1.0], [-1.0, 1.0]])
        loss = contrastive_loss(s, np.array([0, 1]), 0.001)
        assert math.isfinite(loss)
        grad = loss_gradient(s, np.array([0, 1]), 0.001)
        assert np.all(np.isfinite(grad))


class TestValidation:
    def test_bad_temperature(self):
        with pytest.raises(errors.InvalidTemperatureError):
            contrastive_loss(np.ones((1, 2)), np.array([0]), 0.0)

    def test_label_out_of_range(self):
        with pytest.raises(errors.LabelOutOfRangeError):
            contrastive_loss(np.ones((1, 2)), np.array([2]), 0.1)

    def test_empty_batch(self):
        with pytest.raises(errors.EmptyBatchError):
            contrastive_loss(np.ones((0, 2)), np.array([], dtype=int), 0.1)


class TestGradient:
    def test_rows_sum_to_zero(self):
        rng = np.random.default_rng(22)
        s = rng.uniform(-1, 1, (8, 5))
        labels = rng.integers(0, 5, size=8)
        grad = loss_gradient(s, labels, 0.1)
        np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-12)

    def test_symmetric_two_class_case(self):
        grad = loss_gradient(np.array([[0.4, 0.4]]), np.array([0]), 1.0)
        np.testing.assert_allclose(grad, [[-0.5, 0.5]], atol=1e-12)

    def test_true_class_entry_is_unique_negative(self):
        rng = np.random.default_rng(23)
        s = rng.uniform(-1, 1, (6, 4))
        labels = rng.integers(0, 4, size=6)
        grad = loss_gradient(s, labels, 0.1)
        for i, k in enumerate(labels):
            assert grad[i, k] < 0
            assert np.all(np.delete(grad[i], k) > 0)

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            b = int(rng.integers(1, 6))
            c = int(rng.integers(2, 6))
            tau = float(rng.choice([1.0, 0.5, 0.1]))
            s = rng.uniform(-1, 1, (b, c))
            labels = rng.integers(0, c, size=b)
            analytic = loss_gradient(s, labels, tau)
            numeric = central_diff(lambda: contrastive_loss(s, labels, tau), s)
            assert_grad_close(analytic, numeric)

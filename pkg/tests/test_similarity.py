"""Cosine matrices, fusion, prediction, and the cosine backward pass."""

import math

import numpy as np
import pytest

from gradcheck import assert_grad_close, central_diff
from wingfuse import errors
from wingfuse.similarity import (
    SimilarityTriplet,
    cosine_backward,
    cosine_matrix,
    fuse,
    predict,
    similarity_triplet,
)


def naive_cosine(a, t):
    """Oracle: scalar triple loop."""
    out = [[0.0] * len(t) for _ in range(len(a))]
    for i, ai in enumerate(a):
        for j, tj in enumerate(t):
            dot = sum(x * y for x, y in zip(ai, tj))
            na = math.sqrt(sum(x * x for x in ai))
            nt = math.sqrt(sum(y * y for y in tj))
            out[i][j] = dot / (na * nt)
    return out


def naive_fuse(w, q, alpha):
    return [
        [alpha * wv + (1 - alpha) * qv for wv, qv in zip(wr, qr)]
        for wr, qr in zip(w, q)
    ]


class TestCosineMatrix:
    def test_self_similarity_is_one(self):
        v = np.array([[3.0, 4.0]])
        np.testing.assert_allclose(cosine_matrix(v, v), [[1.0]], atol=1e-15)

    def test_orthogonal_rows_are_zero(self):
        a = np.array([[1.0, 0.0]])
        t = np.array([[0.0, 2.0]])
        np.testing.assert_allclose(cosine_matrix(a, t), [[0.0]], atol=1e-15)

    def test_against_naive_triple_loop(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((4, 8))
        t = rng.standard_normal((3, 8))
        np.testing.assert_allclose(
            cosine_matrix(a, t), naive_cosine(a.tolist(), t.tolist()), atol=1e-12
        )

    def test_entries_in_cosine_range(self):
        rng = np.random.default_rng(9)
        c = cosine_matrix(rng.standard_normal((20, 5)), rng.standard_normal((7, 5)))
        assert np.all(c <= 1.0 + 1e-12)
        assert np.all(c >= -1.0 - 1e-12)

    def test_zero_norm_row_rejected_and_named(self):
        a = np.array([[1.0, 0.0], [0.0, 0.0]])
        t = np.array([[1.0, 1.0]])
        with pytest.raises(errors.ZeroNormRowError) as excinfo:
            cosine_matrix(a, t, a_name="images", t_name="centroids")
        assert "row 1" in str(excinfo.value)
        assert "images" in str(excinfo.value)

    def test_per_row_scale_invariance(self):
        rng = np.random.default_rng(10)
        a = rng.standard_normal((5, 6))
        t = rng.standard_normal((4, 6))
        scales = rng.uniform(0.1, 10.0, size=(5, 1))
        np.testing.assert_allclose(
            cosine_matrix(a * scales, t), cosine_matrix(a, t), atol=1e-12
        )


class TestFuse:
    def test_endpoints_bitwise(self):
        rng = np.random.default_rng(11)
        w = rng.standard_normal((3, 4))
        q = rng.standard_normal((3, 4))
        assert fuse(w, q, 1.0).tobytes() == w.tobytes()
        assert fuse(w, q, 0.0).tobytes() == q.tobytes()

    def test_midpoint_value(self):
        s = fuse(np.array([[0.2]]), np.array([[0.6]]), 0.5)
        np.testing.assert_allclose(s, [[0.4]], atol=1e-15)

    def test_against_naive_loop(self):
        rng = np.random.default_rng(12)
        w = rng.uniform(-1, 1, (5, 3))
        q = rng.uniform(-1, 1, (5, 3))
        np.testing.assert_allclose(
            fuse(w, q, 0.3), naive_fuse(w.tolist(), q.tolist(), 0.3), atol=1e-12
        )

    def test_convex_combination_bounds(self):
        rng = np.random.default_rng(13)
        w = rng.uniform(-1, 1, (6, 4))
        q = rng.uniform(-1, 1, (6, 4))
        s = fuse(w, q, 0.7)
        assert np.all(s <= np.maximum(w, q) + 1e-12)
        assert np.all(s >= np.minimum(w, q) - 1e-12)

    def test_alpha_out_of_range(self):
        with pytest.raises(errors.AlphaOutOfRangeError):
            fuse(np.zeros((1, 1)), np.zeros((1, 1)), -0.1)

    def test_shape_mismatch(self):
        with pytest.raises(errors.ShapeMismatchError):
            fuse(np.zeros((1, 2)), np.zeros((2, 1)), 0.5)


class TestPredict:
    def test_argmax(self):
        assert predict(np.array([[0.1, 0.9, 0.3]])).tolist() == [1]

    def test_tie_breaks_to_lowest_index(self):
        assert predict(np.array([[0.5, 0.5]])).tolist() == [0]

    def test_shift_invariance(self):
        rng = np.random.default_rng(14)
        s = rng.standard_normal((6, 5))
        shifted = s + rng.standard_normal((6, 1))
        assert predict(s).tolist() == predict(shifted).tolist()

    def test_empty_matrix_rejected(self):
        with pytest.raises(errors.EmptyMatrixError):
            predict(np.zeros((0, 3)))
        with pytest.raises(errors.EmptyMatrixError):
            predict(np.zeros((3, 0)))

    def test_alpha_one_equals_pure_w_argmax(self):
        rng = np.random.default_rng(15)
        w = rng.uniform(-1, 1, (10, 4))
        q = rng.uniform(-1, 1, (10, 4))
        assert predict(fuse(w, q, 1.0)).tolist() == predict(w).tolist()
        assert predict(fuse(w, q, 0.0)).tolist() == predict(q).tolist()


class TestSimilarityTriplet:
    def test_builder_satisfies_invariants(self):
        rng = np.random.default_rng(18)
        images = rng.standard_normal((5, 6))
        captions = rng.standard_normal((5, 6))
        t = rng.standard_normal((3, 6))
        triplet = similarity_triplet(images, captions, t, 0.3)
        assert np.all(np.abs(triplet.w) <= 1.0 + 1e-12)
        assert np.all(np.abs(triplet.q) <= 1.0 + 1e-12)
        assert np.all(np.abs(triplet.s) <= 1.0 + 1e-12)
        np.testing.assert_array_equal(triplet.s, fuse(triplet.w, triplet.q, 0.3))

    def test_rejects_inconsistent_fusion(self):
        w = np.zeros((2, 2))
        q = np.zeros((2, 2))
        with pytest.raises(errors.InvalidParameterError):
            SimilarityTriplet(w=w, q=q, s=np.ones((2, 2)), alpha=0.5)

    def test_rejects_out_of_range_entries(self):
        good = np.zeros((1, 1))
        with pytest.raises(errors.InvalidParameterError):
            SimilarityTriplet(w=np.array([[1.5]]), q=good, s=fuse(np.array([[1.5]]), good, 0.0), alpha=0.0)


class TestCosineBackward:
    def test_zero_grad_out(self):
        rng = np.random.default_rng(16)
        a = rng.standard_normal((3, 4))
        t = rng.standard_normal((2, 4))
        np.testing.assert_array_equal(
            cosine_backward(a, t, np.zeros((3, 2))), np.zeros((3, 4))
        )

    def test_orthogonal_unit_case(self):
        # unit a orthogonal to unit t, one class, grad 1 -> gradient equals t
        a = np.array([[1.0, 0.0]])
        t = np.array([[0.0, 1.0]])
        np.testing.assert_allclose(
            cosine_backward(a, t, np.ones((1, 1))), t, atol=1e-15
        )

    def test_finite_difference_oracle_100_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            b = int(rng.integers(1, 5))
            c = int(rng.integers(1, 4))
            f = int(rng.integers(2, 7))
            a = rng.standard_normal((b, f))
            t = rng.standard_normal((c, f))
            grad_out = rng.standard_normal((b, c))
            analytic = cosine_backward(a, t, grad_out)
            numeric = central_diff(
                lambda: float(np.sum(grad_out * cosine_matrix(a, t))), a
            )
            assert_grad_close(analytic, numeric)

    def test_zero_norm_rejected(self):
        with pytest.raises(errors.ZeroNormRowError):
            cosine_backward(np.zeros((1, 2)), np.ones((1, 2)), np.ones((1, 1)))

"""Cosine-similarity matrices, their convex fusion, and prediction.

Two branches score a batch against the class centroids: ``W`` from the
image embeddings and ``Q`` from the refined caption embeddings. The
fused score is ``S = alpha * W + (1 - alpha) * Q``; prediction is the
row-wise argmax of ``S``. Only the caption branch carries gradients, so
the backward pass here differentiates a cosine matrix with respect to
its left operand only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AlphaOutOfRangeError,
    EmptyMatrixError,
    InvalidParameterError,
    ShapeMismatchError,
    ZeroNormRowError,
)

MIN_NORM = 1e-12


def _row_norms(x: np.ndarray, name: str) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    small = np.flatnonzero(norms < MIN_NORM)
    if small.size:
        raise ZeroNormRowError(
            f"row {int(small[0])} of {name} has norm {norms[small[0]]:.3e} < {MIN_NORM}"
        )
    return norms


def cosine_matrix(a: np.ndarray, t: np.ndarray, a_name: str = "A", t_name: str = "T") -> np.ndarray:
    """Entry (i, j) is the cosine of the angle between ``a[i]`` and ``t[j]``."""
    a = np.asarray(a, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if a.ndim != 2 or t.ndim != 2 or a.shape[1] != t.shape[1]:
        raise ShapeMismatchError(f"incompatible shapes {a.shape} and {t.shape}")
    a_norms = _row_norms(a, a_name)
    t_norms = _row_norms(t, t_name)
    return (a / a_norms[:, None]) @ (t / t_norms[:, None]).T


def fuse(w: np.ndarray, q: np.ndarray, alpha: float) -> np.ndarray:
    """Elementwise convex combination ``alpha * w + (1 - alpha) * q``.

    The endpoints return an exact copy of the corresponding operand so
    that alpha in {0, 1} is bitwise equivalent to the single branch.
    """
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRangeError(f"alpha must be in [0, 1], got {alpha}")
    w = np.asarray(w, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if w.shape != q.shape:
        raise ShapeMismatchError(f"fuse operands differ in shape: {w.shape} vs {q.shape}")
    if alpha == 1.0:
        return w.copy()
    if alpha == 0.0:
        return q.copy()
    return alpha * w + (1.0 - alpha) * q


def predict(s: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties resolve to the lowest index."""
    s = np.asarray(s)
    if s.ndim != 2 or s.shape[0] == 0 or s.shape[1] == 0:
        raise EmptyMatrixError(f"cannot predict from matrix of shape {s.shape}")
    return np.argmax(s, axis=1)


@dataclass(frozen=True)
class SimilarityTriplet:
    """Both branch score matrices and their fusion, batch x classes.

    ``w`` and ``q`` are cosine matrices (entries in [-1, 1]) and ``s``
    is their convex combination at ``alpha``, so ``s`` shares the range.
    """

    w: np.ndarray
    q: np.ndarray
    s: np.ndarray
    alpha: float

    def __post_init__(self):
        if not (self.w.shape == self.q.shape == self.s.shape):
            raise ShapeMismatchError(
                f"triplet shapes differ: {self.w.shape}, {self.q.shape}, {self.s.shape}"
            )
        tol = 1e-9
        for name, m in (("w", self.w), ("q", self.q)):
            if m.size and (m.min() < -1.0 - tol or m.max() > 1.0 + tol):
                raise InvalidParameterError(f"{name} entries outside the cosine range")
        if not np.array_equal(self.s, fuse(self.w, self.q, self.alpha)):
            raise InvalidParameterError("s is not the alpha-fusion of w and q")


def similarity_triplet(
    images: np.ndarray,
    refined_captions: np.ndarray,
    centroid_matrix: np.ndarray,
    alpha: float,
) -> SimilarityTriplet:
    """Score both branches against the centroids and fuse them."""
    w = cosine_matrix(images, centroid_matrix, "images", "centroids")
    q = cosine_matrix(refined_captions, centroid_matrix, "captions", "centroids")
    return SimilarityTriplet(w=w, q=q, s=fuse(w, q, alpha), alpha=alpha)


def cosine_backward(
    a: np.ndarray, t: np.ndarray, grad_out: np.ndarray
) -> np.ndarray:
    """Gradient of ``sum(grad_out * cosine_matrix(a, t))`` with respect to ``a``.

    For one row pair, d/da [<a,t> / (|a||t|)] = (t_hat - cos * a_hat) / |a|
    with the hats denoting unit vectors; contributions are summed over
    the rows of ``t``.
    """
    a = np.asarray(a, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != (a.shape[0], t.shape[0]):
        raise ShapeMismatchError(
            f"grad_out shape {grad_out.shape} does not match ({a.shape[0]}, {t.shape[0]})"
        )
    a_norms = _row_norms(a, "A")
    t_norms = _row_norms(t, "T")
    a_hat = a / a_norms[:, None]
    t_hat = t / t_norms[:, None]
    cos = a_hat @ t_hat.T
    # sum_j g_ij * t_hat_j  minus  (sum_j g_ij * cos_ij) * a_hat_i, then / |a_i|
    direct = grad_out @ t_hat
    radial = np.sum(grad_out * cos, axis=1, keepdims=True) * a_hat
    return (direct - radial) / a_norms[:, None]

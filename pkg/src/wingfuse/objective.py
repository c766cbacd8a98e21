"""Temperature-scaled contrastive loss over class scores.

Given the fused score matrix ``S`` (batch x classes), each row is
softmaxed at temperature ``tau`` over the class axis and the loss is
the mean negative log-probability of the true class. Computed with
max-subtracted log-sum-exp so arbitrarily small temperatures stay
stable.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyBatchError, InvalidTemperatureError, LabelOutOfRangeError


def _check(s: np.ndarray, labels: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if tau <= 0.0:
        raise InvalidTemperatureError(f"tau must be > 0, got {tau}")
    if s.ndim != 2 or s.shape[0] == 0:
        raise EmptyBatchError(f"need a non-empty batch, got shape {s.shape}")
    if labels.shape != (s.shape[0],):
        raise LabelOutOfRangeError(
            f"{labels.shape} labels for a batch of {s.shape[0]}"
        )
    if labels.size and (labels.min() < 0 or labels.max() >= s.shape[1]):
        bad = labels[(labels < 0) | (labels >= s.shape[1])][0]
        raise LabelOutOfRangeError(f"label {bad} outside catalog of size {s.shape[1]}")
    return s, labels


def contrastive_loss(s: np.ndarray, labels: np.ndarray, tau: float) -> float:
    """Mean over rows of -log softmax(S_i / tau)[true class]."""
    s, labels = _check(s, labels, tau)
    z = s / tau
    zmax = z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z - zmax).sum(axis=1)) + zmax[:, 0]
    per_row = lse - z[np.arange(s.shape[0]), labels]
    return float(per_row.mean())


def loss_gradient(s: np.ndarray, labels: np.ndarray, tau: float) -> np.ndarray:
    """Gradient of :func:`contrastive_loss` with respect to ``S``.

    Entry (i, j) is ``(softmax(S_i / tau)_j - 1[j == label_i]) / (B * tau)``;
    every row sums to zero.
    """
    s, labels = _check(s, labels, tau)
    b = s.shape[0]
    z = s / tau
    z -= z.max(axis=1, keepdims=True)
    expz = np.exp(z)
    softmax = expz / expz.sum(axis=1, keepdims=True)
    softmax[np.arange(b), labels] -= 1.0
    return softmax / (b * tau)

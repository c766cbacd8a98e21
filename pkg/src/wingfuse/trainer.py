"""Mini-batch SGD-with-momentum training of the fusion head.

The image branch is frozen: its cosine scores against the class
centroids are computed once up front and treated as constants, so
gradients flow only through the caption branch and the head. Early
stopping watches validation accuracy and the returned parameters always
come from the best validation epoch.

All randomness derives from the single config seed by fixed offsets:
seed for parameter init, seed + 1 for the epoch shuffles (the CLI uses
seed + 2 for its train/val partition). A hyperparameter search is
likewise fully determined by its own search seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AlignmentMismatchError,
    DimMismatchError,
    EmptyDatasetError,
    InvalidFractionError,
    InvalidParameterError,
    TooFewSamplesError,
    UnknownLabelError,
)
from .fusion import FusionHeadParams, backward, forward, init_params
from .objective import contrastive_loss, loss_gradient
from .similarity import cosine_backward, cosine_matrix, fuse, predict
from .store import EmbeddingMatrix, SampleManifest
from .text_head import ClassCentroids


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run."""

    alpha: float = 0.5
    tau: float = 0.1
    learning_rate: float = 0.09
    momentum: float = 0.80
    batch_size: int = 128
    epochs: int = 30
    patience: int = 5
    hidden_dim: int = 793
    seed: int = 0
    beta: float = 1.0

    def __post_init__(self):
        checks = [
            (0.0 <= self.alpha <= 1.0, f"alpha must be in [0, 1], got {self.alpha}"),
            (self.tau > 0.0, f"tau must be > 0, got {self.tau}"),
            (self.learning_rate >= 0.0, f"learning_rate must be >= 0, got {self.learning_rate}"),
            (0.0 <= self.momentum < 1.0, f"momentum must be in [0, 1), got {self.momentum}"),
            (self.batch_size >= 1, f"batch_size must be >= 1, got {self.batch_size}"),
            (self.epochs >= 1, f"epochs must be >= 1, got {self.epochs}"),
            (self.patience >= 1, f"patience must be >= 1, got {self.patience}"),
            (self.hidden_dim >= 1, f"hidden_dim must be >= 1, got {self.hidden_dim}"),
            (0.0 <= self.beta <= 1.0, f"beta must be in [0, 1], got {self.beta}"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidParameterError(message)


@dataclass(frozen=True)
class TrainReport:
    """Loss/accuracy trajectory and the best-epoch parameters."""

    train_loss: tuple[float, ...]
    val_accuracy: tuple[float, ...]
    best_epoch: int
    stopping_reason: str  # "completed" or "early_stopped"
    params: FusionHeadParams

    @property
    def best_val_accuracy(self) -> float:
        return self.val_accuracy[self.best_epoch]


def report_to_json(report: TrainReport, config: TrainConfig) -> str:
    """Deterministic JSON rendering (parameters live in the model file)."""
    doc = {
        "config": asdict(config),
        "train_loss": list(report.train_loss),
        "val_accuracy": list(report.val_accuracy),
        "best_epoch": report.best_epoch,
        "best_val_accuracy": report.best_val_accuracy,
        "stopping_reason": report.stopping_reason,
        "epochs_run": len(report.train_loss),
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def labels_to_indices(labels: Sequence[str], centroids: ClassCentroids) -> np.ndarray:
    lookup = {name: i for i, name in enumerate(centroids.classes)}
    out = np.empty(len(labels), dtype=np.int64)
    for i, label in enumerate(labels):
        if label not in lookup:
            raise UnknownLabelError(f"label {label!r} not in catalog {centroids.classes}")
        out[i] = lookup[label]
    return out


def _check_aligned(images: EmbeddingMatrix, captions: EmbeddingMatrix, what: str) -> None:
    if images.ids != captions.ids:
        raise AlignmentMismatchError(
            f"{what}: image and caption ids differ (or are ordered differently)"
        )
    if images.dim != captions.dim:
        raise DimMismatchError(
            f"{what}: image dim {images.dim} != caption dim {captions.dim}"
        )


def _accuracy(
    params: FusionHeadParams,
    w: np.ndarray,
    captions: np.ndarray,
    t: np.ndarray,
    label_idx: np.ndarray,
    alpha: float,
) -> float:
    q = cosine_matrix(forward(params, captions), t, "captions", "centroids")
    pred = predict(fuse(w, q, alpha))
    return float(np.mean(pred == label_idx))


def train(
    images: EmbeddingMatrix,
    captions: EmbeddingMatrix,
    labels: Sequence[str],
    centroids: ClassCentroids,
    val_images: EmbeddingMatrix,
    val_captions: EmbeddingMatrix,
    val_labels: Sequence[str],
    config: TrainConfig,
) -> TrainReport:
    """Train the head; returns the trajectory and best-epoch parameters.

    Per epoch: seeded shuffle, then per mini-batch a forward pass of the
    head, cosine scores of the refined captions against the centroids,
    fusion with the frozen image scores, the contrastive loss, and an
    SGD-momentum step (velocity v <- m*v - lr*g, params <- params + v).
    The last partial batch trains with its actual size.
    """
    if images.rows == 0 or val_images.rows == 0:
        raise EmptyDatasetError("training and validation sets must be non-empty")
    _check_aligned(images, captions, "train")
    _check_aligned(val_images, val_captions, "val")
    if len(labels) != images.rows or len(val_labels) != val_images.rows:
        raise AlignmentMismatchError("label count does not match matrix rows")
    if images.dim != centroids.dim:
        raise DimMismatchError(
            f"embedding dim {images.dim} != centroid dim {centroids.dim}"
        )
    label_idx = labels_to_indices(labels, centroids)
    val_label_idx = labels_to_indices(val_labels, centroids)
    t = centroids.matrix

    # Frozen branch: image scores never change during training.
    w_train = cosine_matrix(images.data, t, "images", "centroids")
    w_val = cosine_matrix(val_images.data, t, "images", "centroids")
    captions_data = captions.data
    val_captions_data = val_captions.data

    params = init_params(images.dim, config.hidden_dim, seed=config.seed)
    velocity = [np.zeros_like(a) for a in (params.w1, params.b1, params.w2, params.b2)]
    shuffle_rng = np.random.default_rng(config.seed + 1)

    n = images.rows
    train_loss: list[float] = []
    val_accuracy: list[float] = []
    best_epoch = -1
    best_acc = -np.inf
    best_params = params.copy()
    stall = 0
    reason = "completed"

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb = captions_data[idx]
            lb = forward(params, xb)
            qb = cosine_matrix(lb, t, "captions", "centroids")
            sb = fuse(w_train[idx], qb, config.alpha)
            yb = label_idx[idx]
            loss_sum += contrastive_loss(sb, yb, config.tau) * len(idx)
            grad_s = loss_gradient(sb, yb, config.tau)
            grad_l = _fused_caption_gradient(lb, t, grad_s, config.alpha)
            grads = backward(params, xb, grad_l)
            new_arrays = []
            for v, p, g in zip(
                velocity,
                (params.w1, params.b1, params.w2, params.b2),
                (grads.w1, grads.b1, grads.w2, grads.b2),
            ):
                v *= config.momentum
                v -= config.learning_rate * g
                new_arrays.append(p + v)
            params = FusionHeadParams(*new_arrays)
        train_loss.append(loss_sum / n)

        acc = _accuracy(params, w_val, val_captions_data, t, val_label_idx, config.alpha)
        val_accuracy.append(acc)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_params = params.copy()
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                reason = "early_stopped"
                break

    return TrainReport(
        train_loss=tuple(train_loss),
        val_accuracy=tuple(val_accuracy),
        best_epoch=best_epoch,
        stopping_reason=reason,
        params=best_params,
    )


def _fused_caption_gradient(
    lb: np.ndarray, t: np.ndarray, grad_s: np.ndarray, alpha: float
) -> np.ndarray:
    """Gradient w.r.t. the refined captions; the image branch is constant."""
    grad_q = (1.0 - alpha) * grad_s
    return cosine_backward(lb, t, grad_q)


# --- Monte Carlo partitioning --------------------------------------------------

def monte_carlo_partition(
    manifest: SampleManifest, seed: int, val_fraction: float
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Seeded shuffle-then-split of the manifest ids into (train, val)."""
    if not 0.0 < val_fraction < 1.0:
        raise InvalidFractionError(f"val_fraction must be in (0, 1), got {val_fraction}")
    n = len(manifest.ids)
    if n < 2:
        raise TooFewSamplesError(f"need at least 2 samples to split, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = min(n - 1, max(1, int(round(n * val_fraction))))
    val_ids = tuple(manifest.ids[i] for i in perm[:n_val])
    train_ids = tuple(manifest.ids[i] for i in perm[n_val:])
    return train_ids, val_ids


# --- random hyperparameter search ---------------------------------------------

_CANON_BATCH_SIZES = (128, 256)
_CANON_HIDDEN_DIMS = tuple(253 + 60 * k for k in range(12))
_CANON_LEARNING_RATES = tuple(round(0.01 * i, 2) for i in range(1, 10))
_CANON_MOMENTA = tuple(round(0.80 + 0.02 * k, 2) for k in range(10))
_CANON_EPOCH_RANGE = (25, 100)
_CANON_TAUS = (0.1, 0.01, 0.001)
_CANON_ALPHAS = (0.4, 0.5, 0.6)


def _subset_of(values, canon, name) -> tuple:
    values = tuple(values)
    if not values:
        raise InvalidParameterError(f"{name} must not be empty")
    for v in values:
        if not any(abs(v - c) < 1e-9 for c in canon):
            raise InvalidParameterError(f"{name} value {v} outside allowed set {canon}")
    return values


@dataclass(frozen=True)
class SearchSpace:
    """The sampled hyperparameter sets; values outside them are rejected."""

    batch_sizes: tuple[int, ...] = _CANON_BATCH_SIZES
    hidden_dims: tuple[int, ...] = _CANON_HIDDEN_DIMS
    learning_rates: tuple[float, ...] = _CANON_LEARNING_RATES
    momenta: tuple[float, ...] = _CANON_MOMENTA
    epoch_range: tuple[int, int] = _CANON_EPOCH_RANGE
    taus: tuple[float, ...] = _CANON_TAUS
    alphas: tuple[float, ...] = _CANON_ALPHAS

    def __post_init__(self):
        object.__setattr__(
            self, "batch_sizes", _subset_of(self.batch_sizes, _CANON_BATCH_SIZES, "batch_sizes")
        )
        object.__setattr__(
            self, "hidden_dims", _subset_of(self.hidden_dims, _CANON_HIDDEN_DIMS, "hidden_dims")
        )
        object.__setattr__(
            self,
            "learning_rates",
            _subset_of(self.learning_rates, _CANON_LEARNING_RATES, "learning_rates"),
        )
        object.__setattr__(self, "momenta", _subset_of(self.momenta, _CANON_MOMENTA, "momenta"))
        object.__setattr__(self, "taus", _subset_of(self.taus, _CANON_TAUS, "taus"))
        object.__setattr__(self, "alphas", _subset_of(self.alphas, _CANON_ALPHAS, "alphas"))
        lo, hi = self.epoch_range
        if not (_CANON_EPOCH_RANGE[0] <= lo <= hi <= _CANON_EPOCH_RANGE[1]):
            raise InvalidParameterError(
                f"epoch_range {self.epoch_range} outside {_CANON_EPOCH_RANGE}"
            )
        object.__setattr__(self, "epoch_range", (int(lo), int(hi)))

    def sample(self, rng: np.random.Generator) -> dict:
        """One uniform draw of every searched field."""
        return {
            "batch_size": int(rng.choice(self.batch_sizes)),
            "hidden_dim": int(rng.choice(self.hidden_dims)),
            "learning_rate": float(rng.choice(self.learning_rates)),
            "momentum": float(rng.choice(self.momenta)),
            "epochs": int(rng.integers(self.epoch_range[0], self.epoch_range[1] + 1)),
            "tau": float(rng.choice(self.taus)),
            "alpha": float(rng.choice(self.alphas)),
        }


@dataclass(frozen=True)
class SearchResult:
    config: TrainConfig
    mean_val_accuracy: float
    std_val_accuracy: float
    val_accuracies: tuple[float, ...] = field(default_factory=tuple)


def random_search(
    space: SearchSpace,
    trials: int,
    partitions: int,
    images: EmbeddingMatrix,
    captions: EmbeddingMatrix,
    labels: Sequence[str],
    centroids: ClassCentroids,
    search_seed: int,
    val_fraction: float = 0.1,
) -> list[SearchResult]:
    """Random search: per trial, one sampled config trained once per partition.

    The development set is split into the same ``partitions`` Monte Carlo
    partitions for every trial (partition p uses seed ``search_seed + 1 + p``);
    the training seed for trial t on partition p is
    ``search_seed + 1000 * (t + 1) + p``. Results are sorted by mean
    validation accuracy, descending, ties keeping trial order.
    """
    if trials < 1 or partitions < 1:
        raise InvalidParameterError("trials and partitions must be >= 1")
    _check_aligned(images, captions, "search data")
    labels = list(labels)
    if len(labels) != images.rows:
        raise AlignmentMismatchError("label count does not match matrix rows")

    manifest = SampleManifest(ids=images.ids)
    row_of = {sample_id: i for i, sample_id in enumerate(images.ids)}
    splits = []
    for p in range(partitions):
        train_ids, val_ids = monte_carlo_partition(manifest, search_seed + 1 + p, val_fraction)
        splits.append((
            [row_of[i] for i in train_ids],
            [row_of[i] for i in val_ids],
        ))

    sampler = np.random.default_rng(search_seed)
    results = []
    for t in range(trials):
        sampled = space.sample(sampler)
        accs = []
        for p, (train_rows, val_rows) in enumerate(splits):
            config = TrainConfig(seed=search_seed + 1000 * (t + 1) + p, **sampled)
            report = train(
                images.take(train_rows),
                captions.take(train_rows),
                [labels[i] for i in train_rows],
                centroids,
                images.take(val_rows),
                captions.take(val_rows),
                [labels[i] for i in val_rows],
                config,
            )
            accs.append(report.best_val_accuracy)
        results.append(
            SearchResult(
                config=TrainConfig(seed=search_seed + 1000 * (t + 1), **sampled),
                mean_val_accuracy=float(np.mean(accs)),
                std_val_accuracy=float(np.std(accs)),
                val_accuracies=tuple(accs),
            )
        )
    return sorted(results, key=lambda r: -r.mean_val_accuracy)


def ranking_to_json(results: Sequence[SearchResult]) -> str:
    doc = [
        {
            "config": asdict(r.config),
            "mean_val_accuracy": r.mean_val_accuracy,
            "std_val_accuracy": r.std_val_accuracy,
            "val_accuracies": list(r.val_accuracies),
        }
        for r in results
    ]
    return json.dumps(doc, sort_keys=True, indent=2)

"""Zero-shot open-set evaluation and sensitivity sweeps.

Evaluation never sees the training catalog: the test-side centroids
alone define the prediction indices, so the test classes may be
entirely disjoint from the classes trained on. Macro-F1 averages
per-class F1 over the classes present in the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AlignmentMismatchError,
    DimMismatchError,
    EmptyDatasetError,
    EmptyPresentSetError,
    InvalidParameterError,
)
from .fusion import FusionHeadParams, forward
from .similarity import predict, similarity_triplet
from .store import ClassPack, EmbeddingMatrix
from .text_head import ClassCentroids, build_class_matrix
from .trainer import labels_to_indices


@dataclass(frozen=True)
class ClassMetrics:
    name: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    classes: tuple[str, ...]
    accuracy: float
    macro_f1: float
    per_class: tuple[ClassMetrics, ...]
    confusion: np.ndarray  # rows = true class, columns = predicted
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": [
                {
                    "name": m.name,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for m in self.per_class
            ],
            "confusion": self.confusion.tolist(),
            "n_samples": self.n_samples,
        }


def confusion_matrix(
    true_idx: np.ndarray, pred_idx: np.ndarray, n_classes: int
) -> np.ndarray:
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (true_idx, pred_idx), 1)
    return counts


def macro_f1(confusion: np.ndarray, present: Iterable[int]) -> float:
    """Mean F1 over ``present`` classes; F1 is 0 where precision+recall is 0."""
    present = sorted(set(present))
    if not present:
        raise EmptyPresentSetError("macro-F1 needs at least one class present")
    confusion = np.asarray(confusion)
    if np.any(confusion < 0):
        raise InvalidParameterError("confusion counts must be non-negative")
    scores = []
    for c in present:
        tp = confusion[c, c]
        predicted = confusion[:, c].sum()
        actual = confusion[c, :].sum()
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / actual if actual > 0 else 0.0
        if precision + recall == 0.0:
            scores.append(0.0)
        else:
            scores.append(2.0 * precision * recall / (precision + recall))
    return float(np.mean(scores))


def score_matrix(
    params: FusionHeadParams,
    alpha: float,
    images: EmbeddingMatrix,
    captions: EmbeddingMatrix,
    centroids: ClassCentroids,
) -> np.ndarray:
    """Fused scores of every sample against every catalog class."""
    if images.rows == 0:
        raise EmptyDatasetError("cannot score an empty matrix")
    if images.ids != captions.ids:
        raise AlignmentMismatchError("image and caption ids differ")
    if images.dim != centroids.dim:
        raise DimMismatchError(
            f"embedding dim {images.dim} != centroid dim {centroids.dim}"
        )
    triplet = similarity_triplet(
        images.data, forward(params, captions.data), centroids.matrix, alpha
    )
    return triplet.s


def evaluate(
    params: FusionHeadParams,
    alpha: float,
    images: EmbeddingMatrix,
    captions: EmbeddingMatrix,
    centroids: ClassCentroids,
    labels: Sequence[str],
) -> EvalReport:
    """Accuracy, macro-F1, per-class metrics, and the confusion matrix."""
    if len(labels) != images.rows:
        raise AlignmentMismatchError(
            f"{len(labels)} labels for {images.rows} samples"
        )
    scores = score_matrix(params, alpha, images, captions, centroids)
    pred_idx = predict(scores)
    true_idx = labels_to_indices(labels, centroids)
    n_classes = len(centroids.classes)
    confusion = confusion_matrix(true_idx, pred_idx, n_classes)
    accuracy = float(np.trace(confusion) / len(labels))
    present = np.flatnonzero(confusion.sum(axis=1) > 0)

    per_class = []
    for c in range(n_classes):
        tp = confusion[c, c]
        predicted = confusion[:, c].sum()
        actual = confusion[c, :].sum()
        precision = float(tp / predicted) if predicted > 0 else 0.0
        recall = float(tp / actual) if actual > 0 else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        per_class.append(
            ClassMetrics(
                name=centroids.classes[c],
                precision=precision,
                recall=recall,
                f1=f1,
                support=int(actual),
            )
        )

    return EvalReport(
        classes=centroids.classes,
        accuracy=accuracy,
        macro_f1=macro_f1(confusion, present),
        per_class=tuple(per_class),
        confusion=confusion,
        n_samples=len(labels),
    )


# --- sensitivity sweeps --------------------------------------------------------

@dataclass(frozen=True)
class EvalSplit:
    """One named evaluation split: aligned matrices plus ground truth."""

    name: str
    images: EmbeddingMatrix
    captions: EmbeddingMatrix
    labels: tuple[str, ...]


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    split: str
    accuracy: float
    macro_f1: float


SWEEP_PARAMETERS = ("alpha", "beta", "mc")


def truncate_pack(pack: ClassPack, m: int) -> ClassPack:
    """Keep only the first ``m`` generated-description rows per class."""
    if m < 1:
        raise InvalidParameterError(f"description count must be >= 1, got {m}")
    entries = []
    for entry in pack.entries:
        keep = min(m, entry.llm.rows)
        entries.append(replace(entry, llm=entry.llm.take(range(keep))))
    return ClassPack(entries=tuple(entries))


def sweep(
    parameter: str,
    grid: Sequence[float],
    params: FusionHeadParams,
    splits: Sequence[EvalSplit],
    *,
    alpha: float,
    centroids: ClassCentroids | None = None,
    pack: ClassPack | None = None,
    beta: float = 1.0,
) -> list[SweepRow]:
    """Re-evaluate along one hyperparameter axis without retraining.

    ``alpha`` varies the fusion weight against fixed centroids; ``beta``
    rebuilds the centroids per blend weight from the pack; ``mc``
    rebuilds them from the first m description rows per class.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise InvalidParameterError(
            f"parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}"
        )
    if parameter == "alpha" and centroids is None:
        raise InvalidParameterError("alpha sweep needs centroids")
    if parameter in ("beta", "mc") and pack is None:
        raise InvalidParameterError(f"{parameter} sweep needs a class pack")

    rows = []
    for value in grid:
        if parameter == "alpha":
            point_alpha, point_centroids = float(value), centroids
        elif parameter == "beta":
            point_alpha = alpha
            point_centroids = build_class_matrix(pack, float(value))
        else:
            point_alpha = alpha
            point_centroids = build_class_matrix(truncate_pack(pack, int(value)), beta)
        for split in splits:
            report = evaluate(
                params, point_alpha, split.images, split.captions, point_centroids,
                split.labels,
            )
            rows.append(
                SweepRow(
                    parameter=parameter,
                    value=float(value),
                    split=split.name,
                    accuracy=report.accuracy,
                    macro_f1=report.macro_f1,
                )
            )
    return rows

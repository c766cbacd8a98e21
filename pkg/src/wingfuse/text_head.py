"""Per-class text centroids and the generated/template blend.

Each class is represented by the arithmetic mean of its description
embeddings. Two description sources can contribute: sentences generated
per class (the default, ``beta=1``) and rendered prompt templates; the
blend weight ``beta`` interpolates between the template centroid
(``beta=0``) and the generated-description centroid (``beta=1``).
Centroids are computed on raw embeddings; normalization happens only
inside cosine similarity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BetaOutOfRangeError,
    DimMismatchError,
    EmptyDescriptionSetError,
    InvalidParameterError,
    MissingTemplateEmbeddingsError,
)
from .store import ClassPack, EmbeddingMatrix, load_embedding_file, write_embedding_file


@dataclass(frozen=True)
class ClassCentroids:
    """Ordered class catalog and its |C| x F centroid matrix."""

    classes: tuple[str, ...]
    matrix: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(self.classes):
            raise InvalidParameterError(
                f"centroid matrix shape {matrix.shape} does not match "
                f"{len(self.classes)} classes"
            )
        if not np.all(np.isfinite(matrix)):
            raise InvalidParameterError("centroid matrix contains non-finite values")
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def index_of(self, name: str) -> int:
        return self.classes.index(name)


def compute_centroid(descriptions: EmbeddingMatrix) -> np.ndarray:
    """Arithmetic mean of the description rows of one class."""
    if descriptions.rows == 0:
        raise EmptyDescriptionSetError("cannot average zero description embeddings")
    return descriptions.data.mean(axis=0)


def blend(m1: np.ndarray, m2: np.ndarray, beta: float) -> np.ndarray:
    """Convex combination ``(1 - beta) * m1 + beta * m2``, componentwise."""
    if not 0.0 <= beta <= 1.0:
        raise BetaOutOfRangeError(f"beta must be in [0, 1], got {beta}")
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    if m1.shape != m2.shape:
        raise DimMismatchError(f"blend operands differ in shape: {m1.shape} vs {m2.shape}")
    if beta == 0.0:
        return m1.copy()
    if beta == 1.0:
        return m2.copy()
    return (1.0 - beta) * m1 + beta * m2


def build_class_matrix(pack: ClassPack, beta: float = 1.0) -> ClassCentroids:
    """Stack per-class centroids in pack order.

    ``m1`` is the template centroid and ``m2`` the generated-description
    centroid. With ``beta=1`` template embeddings are ignored entirely
    (classes may omit them); any ``beta < 1`` requires template
    embeddings for every class.
    """
    if not 0.0 <= beta <= 1.0:
        raise BetaOutOfRangeError(f"beta must be in [0, 1], got {beta}")
    rows = []
    for entry in pack.entries:
        m2 = compute_centroid(entry.llm)
        if beta == 1.0:
            rows.append(m2)
            continue
        if entry.template is None:
            raise MissingTemplateEmbeddingsError(
                f"class {entry.name!r} has no template embeddings but beta={beta} < 1"
            )
        m1 = compute_centroid(entry.template)
        rows.append(blend(m1, m2, beta))
    matrix = np.vstack(rows) if rows else np.zeros((0, 1))
    return ClassCentroids(classes=pack.classes, matrix=matrix, beta=beta)


# --- persistence -------------------------------------------------------------

def classes_sidecar_path(matrix_path: str | Path) -> Path:
    return Path(matrix_path).with_name("classes.json")


def write_class_centroids(centroids: ClassCentroids, path: str | Path) -> None:
    """Write centroids as one WING file plus a ``classes.json`` order sidecar."""
    path = Path(path)
    write_embedding_file(EmbeddingMatrix(centroids.matrix, centroids.classes), path)
    doc = {"classes": list(centroids.classes), "beta": centroids.beta}
    classes_sidecar_path(path).write_text(
        json.dumps(doc, sort_keys=True, indent=0), encoding="utf-8"
    )


def load_class_centroids(path: str | Path) -> ClassCentroids:
    path = Path(path)
    matrix = load_embedding_file(path)
    sidecar = classes_sidecar_path(path)
    beta = 1.0
    classes = matrix.ids
    if sidecar.exists():
        doc = json.loads(sidecar.read_text(encoding="utf-8"))
        classes = tuple(doc["classes"])
        beta = float(doc.get("beta", 1.0))
        if len(classes) != matrix.rows:
            raise InvalidParameterError(
                f"{sidecar}: {len(classes)} classes for {matrix.rows} centroid rows"
            )
    return ClassCentroids(classes=classes, matrix=matrix.data, beta=beta)

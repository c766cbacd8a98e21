"""Embedding storage: the WING binary format, manifests, and class packs.

On-disk layout
--------------
Embedding file (little-endian throughout):

    offset 0   magic   ``WING`` (4 ASCII bytes)
    offset 4   version u16, currently 1
    offset 6   flags   u16, currently 0
    offset 8   rows    u64
    offset 16  dim     u64
    offset 24  payload rows*dim float32 values, row-major

Identifiers, labels, and the split tag live in a UTF-8 JSON sidecar at
``<path>.manifest.json``:

    {"ids": [...], "labels": [...], "split": "train"}

``labels`` and ``split`` are optional. A class pack is a directory whose
``pack.json`` lists, per class, an embedding file of generated
descriptions and optionally a second file of rendered-template
descriptions.

Values are stored as float32 and widened to float64 on load; all
computation downstream runs in float64.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagicError,
    InvalidHeaderError,
    InvalidParameterError,
    ManifestError,
    NonFiniteValueError,
    PackError,
    TruncatedFileError,
    VersionUnsupportedError,
)

MAGIC = b"WING"
VERSION = 1
_HEADER = struct.Struct("<4sHHQQ")  # magic, version, flags, rows, dim
HEADER_SIZE = _HEADER.size

VALID_SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N x F matrix of embedding coordinates with one id per row."""

    data: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise InvalidParameterError(f"embedding data must be 2-D, got ndim={data.ndim}")
        if data.shape[1] < 1:
            raise InvalidParameterError("embedding dim must be >= 1")
        if not np.all(np.isfinite(data)):
            bad = np.argwhere(~np.isfinite(data))[0]
            raise NonFiniteValueError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        ids = tuple(self.ids)
        if len(ids) != data.shape[0]:
            raise InvalidParameterError(
                f"{len(ids)} ids for {data.shape[0]} rows"
            )
        if len(set(ids)) != len(ids):
            seen = set()
            dup = next(i for i in ids if i in seen or seen.add(i))
            raise InvalidParameterError(f"duplicate id {dup!r}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "ids", ids)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def take(self, indices: Sequence[int]) -> "EmbeddingMatrix":
        """Row subset, preserving the order of ``indices``."""
        idx = list(indices)
        return EmbeddingMatrix(self.data[idx], tuple(self.ids[i] for i in idx))


@dataclass(frozen=True)
class SampleManifest:
    """Sidecar metadata aligned positionally with an embedding matrix."""

    ids: tuple[str, ...]
    labels: tuple[str, ...] | None = None
    split: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(self.ids):
                raise ManifestError(
                    f"{len(labels)} labels for {len(self.ids)} ids"
                )
            object.__setattr__(self, "labels", labels)
        if self.split is not None and self.split not in VALID_SPLITS:
            raise ManifestError(f"split must be one of {VALID_SPLITS}, got {self.split!r}")


@dataclass(frozen=True)
class ClassEntry:
    """One class of a pack: generated descriptions plus optional templates."""

    name: str
    llm: EmbeddingMatrix
    template: EmbeddingMatrix | None = None


@dataclass(frozen=True)
class ClassPack:
    """Ordered class catalog with per-class description embeddings."""

    entries: tuple[ClassEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple(self.entries)
        names = [e.name for e in entries]
        if len(set(names)) != len(names):
            raise PackError("class names must be unique")
        dims = {e.llm.dim for e in entries}
        dims |= {e.template.dim for e in entries if e.template is not None}
        if len(dims) > 1:
            raise PackError(f"inconsistent embedding dims across pack: {sorted(dims)}")
        object.__setattr__(self, "entries", entries)

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    @property
    def dim(self) -> int:
        if not self.entries:
            raise PackError("empty pack has no dim")
        return self.entries[0].llm.dim


# --- binary format -----------------------------------------------------------

def write_embedding_file(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Write ``matrix`` at ``path`` plus its ``<path>.manifest.json`` sidecar.

    Refuses non-finite values before touching the filesystem. Storage
    precision is float32; a load of the written file reproduces the
    float32 payload bit for bit.
    """
    path = Path(path)
    data = np.ascontiguousarray(matrix.data, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise NonFiniteValueError(f"non-finite value at row {bad[0]}, column {bad[1]}")
    payload = data.astype("<f4").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, 0, matrix.rows, matrix.dim)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    write_manifest(SampleManifest(ids=matrix.ids), path)


def write_manifest(manifest: SampleManifest, matrix_path: str | Path) -> None:
    doc: dict = {"ids": list(manifest.ids)}
    if manifest.labels is not None:
        doc["labels"] = list(manifest.labels)
    if manifest.split is not None:
        doc["split"] = manifest.split
    sidecar = manifest_path(matrix_path)
    sidecar.write_text(json.dumps(doc, sort_keys=True, indent=0), encoding="utf-8")


def manifest_path(matrix_path: str | Path) -> Path:
    p = Path(matrix_path)
    return p.with_name(p.name + ".manifest.json")


def load_manifest(matrix_path: str | Path) -> SampleManifest:
    """Read the sidecar manifest for the matrix at ``matrix_path``."""
    sidecar = manifest_path(matrix_path)
    if not sidecar.exists():
        raise ManifestError(f"manifest sidecar not found: {sidecar}")
    try:
        doc = json.loads(sidecar.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"malformed manifest {sidecar}: {exc}") from exc
    if not isinstance(doc, dict) or "ids" not in doc:
        raise ManifestError(f"manifest {sidecar} must be an object with an 'ids' list")
    labels = doc.get("labels")
    return SampleManifest(
        ids=tuple(doc["ids"]),
        labels=tuple(labels) if labels is not None else None,
        split=doc.get("split"),
    )


def load_embedding_file(path: str | Path) -> EmbeddingMatrix:
    """Load a WING embedding file and its manifest sidecar.

    Raises :class:`BadMagicError`, :class:`VersionUnsupportedError`,
    :class:`TruncatedFileError`, :class:`InvalidHeaderError`, or
    :class:`NonFiniteValueError` depending on which part of the file is
    corrupt; messages name the offending byte offset or row.
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < HEADER_SIZE:
        raise TruncatedFileError(
            f"{path}: {len(blob)} bytes is shorter than the {HEADER_SIZE}-byte header"
        )
    magic, version, flags, rows, dim = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r} at offset 0")
    if version != VERSION:
        raise VersionUnsupportedError(f"{path}: version {version} at offset 4 unsupported")
    if flags != 0:
        raise VersionUnsupportedError(f"{path}: unknown flag bits 0x{flags:04x} at offset 6")
    if dim < 1:
        raise InvalidHeaderError(f"{path}: dim {dim} at offset 16 must be >= 1")
    expected = rows * dim * 4
    actual = len(blob) - HEADER_SIZE
    if actual != expected:
        raise TruncatedFileError(
            f"{path}: payload holds {actual} bytes, header declares {expected} "
            f"({rows} rows x {dim} dim x 4)"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER_SIZE).reshape(rows, dim)
    if not np.all(np.isfinite(data)):
        bad_row = int(np.argwhere(~np.isfinite(data))[0][0])
        raise NonFiniteValueError(f"{path}: non-finite value in row {bad_row}")
    ids = _ids_for(path, rows)
    return EmbeddingMatrix(data.astype(np.float64), ids)


def _ids_for(path: Path, rows: int) -> tuple[str, ...]:
    sidecar = manifest_path(path)
    if sidecar.exists():
        manifest = load_manifest(path)
        if len(manifest.ids) != rows:
            raise ManifestError(
                f"{sidecar}: {len(manifest.ids)} ids for {rows} matrix rows"
            )
        return manifest.ids
    return tuple(f"row{i:06d}" for i in range(rows))


# --- class packs -------------------------------------------------------------

def load_class_pack(directory: str | Path) -> ClassPack:
    """Load a pack directory (``pack.json`` plus referenced WING files)."""
    directory = Path(directory)
    index = directory / "pack.json"
    if not index.exists():
        raise PackError(f"{directory}: pack.json not found")
    try:
        doc = json.loads(index.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PackError(f"{index}: malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("classes"), list):
        raise PackError(f"{index}: expected an object with a 'classes' list")
    entries = []
    for item in doc["classes"]:
        if not isinstance(item, dict):
            raise PackError(f"{index}: class entries must be objects")
        name = item.get("name")
        llm_file = item.get("llm")
        if not name or not llm_file:
            raise PackError(f"{index}: every class needs 'name' and 'llm' fields")
        llm = load_embedding_file(directory / llm_file)
        template = None
        if item.get("template"):
            template = load_embedding_file(directory / item["template"])
        entries.append(ClassEntry(name=name, llm=llm, template=template))
    return ClassPack(entries=tuple(entries))


def write_class_pack(pack: ClassPack, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    listing = []
    for i, entry in enumerate(pack.entries):
        llm_file = f"class{i:03d}_llm.wing"
        write_embedding_file(entry.llm, directory / llm_file)
        item = {"name": entry.name, "llm": llm_file}
        if entry.template is not None:
            tpl_file = f"class{i:03d}_template.wing"
            write_embedding_file(entry.template, directory / tpl_file)
            item["template"] = tpl_file
        listing.append(item)
    (directory / "pack.json").write_text(
        json.dumps({"classes": listing}, sort_keys=True, indent=2), encoding="utf-8"
    )


# --- synthetic data ----------------------------------------------------------

@dataclass(frozen=True)
class SynthSplit:
    """One split of a synthetic dataset: aligned image/caption embeddings."""

    images: EmbeddingMatrix
    captions: EmbeddingMatrix
    manifest: SampleManifest


@dataclass(frozen=True)
class SynthDataset:
    train: SynthSplit
    test: SynthSplit
    pack: ClassPack


_BLOB_STD = 0.28        # within-class spread around each anchor
_CAPTION_STD = 0.12     # caption = image + this much noise
_PACK_LLM_STD = 0.15    # generated-description spread around anchors
_PACK_TPL_STD = 0.40    # template descriptions are vaguer
_PACK_LLM_ROWS = 12
_PACK_TPL_ROWS = 20


def synth_dataset(
    seed: int,
    classes: int,
    per_class: int,
    dim: int,
    shift: float,
) -> SynthDataset:
    """Deterministic synthetic stand-in for a cross-region embedding dataset.

    Class clusters are unit-normalized Gaussian blobs around orthogonal-ish
    anchors; ``shift`` rotates and translates the test blobs to mimic a
    change of region. Caption embeddings are the image embeddings plus
    seeded noise, and the class pack holds noisy copies of the anchors.
    Same arguments, same dataset, down to the serialized bytes.
    """
    if classes < 1 or per_class < 1:
        raise InvalidParameterError("classes and per_class must be >= 1")
    if dim < 2:
        raise InvalidParameterError("dim must be >= 2")
    rng = np.random.default_rng(seed)

    anchors = _anchors(rng, classes, dim)
    rotation = _rotation(rng, dim, shift)
    translation = shift * _unit(rng.standard_normal(dim))

    names = tuple(f"class{c:02d}" for c in range(classes))

    def make_split(split_name: str, shifted: bool) -> SynthSplit:
        points = []
        labels = []
        for c in range(classes):
            points.append(anchors[c] + _BLOB_STD * rng.standard_normal((per_class, dim)))
            labels.extend([names[c]] * per_class)
        raw = np.vstack(points)
        base = _normalize_rows(raw)
        if shifted:
            images = _normalize_rows(raw @ rotation.T + translation)
        else:
            images = base
        # Captions describe the animal, not the region: they are the image
        # embeddings plus noise, taken before any region shift.
        captions = base + _CAPTION_STD * rng.standard_normal(base.shape)
        ids = tuple(f"{split_name}-{i:05d}" for i in range(images.shape[0]))
        manifest = SampleManifest(ids=ids, labels=tuple(labels), split=split_name)
        return SynthSplit(
            images=EmbeddingMatrix(images, ids),
            captions=EmbeddingMatrix(captions, ids),
            manifest=manifest,
        )

    train = make_split("train", shifted=False)
    test = make_split("test", shifted=shift != 0.0)

    entries = []
    for c in range(classes):
        llm = anchors[c] + _PACK_LLM_STD * rng.standard_normal((_PACK_LLM_ROWS, dim))
        tpl = anchors[c] + _PACK_TPL_STD * rng.standard_normal((_PACK_TPL_ROWS, dim))
        entries.append(
            ClassEntry(
                name=names[c],
                llm=EmbeddingMatrix(llm, tuple(f"{names[c]}-llm{i:02d}" for i in range(_PACK_LLM_ROWS))),
                template=EmbeddingMatrix(tpl, tuple(f"{names[c]}-tpl{i:02d}" for i in range(_PACK_TPL_ROWS))),
            )
        )
    return SynthDataset(train=train, test=test, pack=ClassPack(entries=tuple(entries)))


def write_synth_dataset(dataset: SynthDataset, directory: str | Path) -> None:
    """Materialize a synthetic dataset as WING files + manifests + pack dir."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for split_name, split in (("train", dataset.train), ("test", dataset.test)):
        img_path = directory / f"{split_name}_images.wing"
        cap_path = directory / f"{split_name}_captions.wing"
        write_embedding_file(split.images, img_path)
        write_manifest(split.manifest, img_path)
        write_embedding_file(split.captions, cap_path)
        write_manifest(split.manifest, cap_path)
    write_class_pack(dataset.pack, directory / "pack")


def _anchors(rng: np.random.Generator, classes: int, dim: int) -> np.ndarray:
    """Orthonormal class anchors when classes <= dim, unit Gaussians otherwise."""
    raw = rng.standard_normal((max(classes, 1), dim))
    if classes <= dim:
        q, _ = np.linalg.qr(raw.T)
        return q.T[:classes]
    return _normalize_rows(raw)


def _rotation(rng: np.random.Generator, dim: int, shift: float) -> np.ndarray:
    """Product of Givens rotations, each by angle ``shift`` radians."""
    rot = np.eye(dim)
    if shift == 0.0:
        return rot
    axes = rng.permutation(dim)
    cos, sin = math.cos(shift), math.sin(shift)
    for k in range(0, dim - 1, 2):
        i, j = int(axes[k]), int(axes[k + 1])
        g = np.eye(dim)
        g[i, i] = cos
        g[j, j] = cos
        g[i, j] = -sin
        g[j, i] = sin
        rot = g @ rot
    return rot


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return x / norms


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v

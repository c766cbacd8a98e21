"""Extraction job configuration.

A job is one JSON file; credentials for real model backends come from
environment variables (never from the job file), e.g.
``WINGEXTRACT_API_KEY``. The builtin deterministic backends need none.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import JobError

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".webp")


@dataclass(frozen=True)
class ExtractionJob:
    image_dir: Path
    out_dir: Path
    classes: tuple[str, ...] = ()
    confidence_threshold: float = 0.7
    detector: str = "fullframe"
    encoder: str = "hash:64"
    vlm: str = "stub-vlm"
    llm: str = "stub-llm"
    descriptions_per_class: int = 12
    split: str | None = None
    vlm_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise JobError(
                f"confidence_threshold must be in [0, 1], got {self.confidence_threshold}"
            )
        if self.descriptions_per_class < 1:
            raise JobError("descriptions_per_class must be >= 1")
        object.__setattr__(self, "image_dir", Path(self.image_dir))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def cache_dir(self) -> Path:
        return self.out_dir / ".cache"


def load_job(path: str | Path) -> ExtractionJob:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise JobError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise JobError(f"{path}: job file must be a JSON object")
    known = {
        "image_dir", "out_dir", "classes", "confidence_threshold", "detector",
        "encoder", "vlm", "llm", "descriptions_per_class", "split", "vlm_options",
    }
    unknown = set(doc) - known
    if unknown:
        raise JobError(f"{path}: unknown job fields {sorted(unknown)}")
    if "image_dir" not in doc or "out_dir" not in doc:
        raise JobError(f"{path}: job needs image_dir and out_dir")
    return ExtractionJob(**doc)


def list_images(job: ExtractionJob) -> list[Path]:
    """Stable, sorted listing of all images under the job's image directory."""
    if not job.image_dir.exists():
        raise JobError(f"image directory {job.image_dir} does not exist")
    return sorted(
        p for p in job.image_dir.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def label_for(job: ExtractionJob, image_path: Path) -> str | None:
    """Label from the class-named parent directory, when images are laid
    out as ``<image_dir>/<class>/<file>``; otherwise None."""
    parent = image_path.parent
    if parent != job.image_dir and parent.name in job.classes:
        return parent.name
    return None

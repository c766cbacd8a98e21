"""Embedding extraction for the recognition pipeline.

Detects and crops animals in camera-trap images, captions the crops,
generates per-class description sentences, embeds everything with a
pluggable encoder, and writes the WING files, manifests, and class packs
the recognition side consumes.
"""

from .errors import (
    DetectorUnavailableError,
    EmptyResponseError,
    EncoderUnavailableError,
    JobError,
    LLMUnavailableError,
    WingextractError,
)
from .job import ExtractionJob, load_job
from .pipeline import (
    build_class_pack,
    extract_caption_embeddings,
    extract_image_embeddings,
    run_job,
)

__version__ = "0.1.0"

__all__ = [
    "DetectorUnavailableError",
    "EmptyResponseError",
    "EncoderUnavailableError",
    "ExtractionJob",
    "JobError",
    "LLMUnavailableError",
    "WingextractError",
    "build_class_pack",
    "extract_caption_embeddings",
    "extract_image_embeddings",
    "load_job",
    "run_job",
]

"""The extraction stages: detect/crop, embed, caption, describe, write.

All model calls are cached on disk keyed by (model id, prompt, input
content), so re-runs are resumable and byte-identical. Outputs are the
exact wire formats the recognition side ingests: WING embedding files
with manifest sidecars, and a class-pack directory.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from . import prompts
from .cache import ModelCache, content_key
from .errors import EmptyResponseError
from .formats import write_pack, write_wing
from .job import ExtractionJob, label_for, list_images
from .models import make_captioner, make_describer, make_detector, make_encoder

IMAGES_FILE = "images.wing"
CAPTIONS_FILE = "captions.wing"
CAPTIONS_TEXT_FILE = "captions.json"
PACK_DIR = "pack"
LOG_FILE = "extraction_log.json"

_RETRIES = 3


def _crop_bytes(crop: Image.Image) -> bytes:
    rgb = crop.convert("RGB")
    return (
        rgb.size[0].to_bytes(4, "little")
        + rgb.size[1].to_bytes(4, "little")
        + rgb.tobytes()
    )


class _Crops:
    """Shared detect-and-crop pass so image and caption rows stay aligned."""

    def __init__(self, job: ExtractionJob, cache: ModelCache):
        self.job = job
        self.cache = cache
        self.detector = make_detector(job.detector)
        self.ids: list[str] = []
        self.labels: list[str | None] = []
        self.crops: list[Image.Image] = []
        self.skipped: list[dict] = []
        self._run()

    def _run(self) -> None:
        for path in list_images(self.job):
            rel = path.relative_to(self.job.image_dir).as_posix()
            try:
                content = path.read_bytes()
                with Image.open(path) as img:
                    img.load()
                    detections = self.cache.get_or_compute(
                        self.job.detector,
                        content_key(b"detect", content),
                        lambda: [
                            [list(box), conf]
                            for box, conf in self.detector.detect(img, content)
                        ],
                    )
                    for k, (box, conf) in enumerate(detections):
                        if conf < self.job.confidence_threshold:
                            continue
                        self.ids.append(f"{rel}#{k}")
                        self.labels.append(label_for(self.job, path))
                        self.crops.append(img.crop(tuple(box)).convert("RGB"))
            except OSError as exc:
                self.skipped.append({"file": rel, "reason": str(exc)})

    @property
    def manifest_labels(self) -> list[str] | None:
        if self.labels and all(l is not None for l in self.labels):
            return list(self.labels)
        return None


def _write_log(job: ExtractionJob, crops: _Crops) -> None:
    log = {
        "detector": job.detector,
        "encoder": job.encoder,
        "vlm": job.vlm,
        "llm": job.llm,
        "vlm_options": job.vlm_options,
        "confidence_threshold": job.confidence_threshold,
        "rows": len(crops.ids),
        "skipped": crops.skipped,
    }
    (job.out_dir / LOG_FILE).write_text(
        json.dumps(log, sort_keys=True, indent=2), encoding="utf-8"
    )


def extract_image_embeddings(job: ExtractionJob) -> Path:
    """One embedding row per accepted detection crop; returns the WING path."""
    job.out_dir.mkdir(parents=True, exist_ok=True)
    cache = ModelCache(job.cache_dir)
    encoder = make_encoder(job.encoder)
    crops = _Crops(job, cache)

    vectors = [
        cache.get_or_compute(
            encoder.model_id,
            content_key(b"image-embed", _crop_bytes(crop)),
            lambda crop=crop: encoder.encode_image(crop).tolist(),
        )
        for crop in crops.crops
    ]
    data = np.asarray(vectors, dtype=np.float64).reshape(len(vectors), encoder.dim)
    out = job.out_dir / IMAGES_FILE
    extra = {"skipped": crops.skipped} if crops.skipped else None
    write_wing(
        data, crops.ids, out,
        labels=crops.manifest_labels, split=job.split, extra=extra,
    )
    _write_log(job, crops)
    return out


def extract_caption_embeddings(job: ExtractionJob) -> Path:
    """Caption every accepted crop and embed the captions, row-aligned with
    the image file. Raw captions are kept in a JSON sidecar for audit."""
    job.out_dir.mkdir(parents=True, exist_ok=True)
    cache = ModelCache(job.cache_dir)
    encoder = make_encoder(job.encoder)
    captioner = make_captioner(job.vlm)
    crops = _Crops(job, cache)

    prompt_key = content_key(
        prompts.CAPTION_SYSTEM_PROMPT,
        prompts.CAPTION_USER_PROMPT,
        json.dumps(job.vlm_options, sort_keys=True),
    )
    captions: list[str] = []
    for crop in crops.crops:
        raw = _crop_bytes(crop)
        caption = cache.get_or_compute(
            captioner.model_id,
            content_key(b"caption", prompt_key, raw),
            lambda crop=crop, raw=raw: captioner.caption(crop, raw),
        )
        captions.append(caption)

    vectors = [
        cache.get_or_compute(
            encoder.model_id,
            content_key(b"text-embed", caption),
            lambda caption=caption: encoder.encode_text(caption).tolist(),
        )
        for caption in captions
    ]
    data = np.asarray(vectors, dtype=np.float64).reshape(len(vectors), encoder.dim)
    out = job.out_dir / CAPTIONS_FILE
    extra = {"skipped": crops.skipped} if crops.skipped else None
    write_wing(
        data, crops.ids, out,
        labels=crops.manifest_labels, split=job.split, extra=extra,
    )
    (job.out_dir / CAPTIONS_TEXT_FILE).write_text(
        json.dumps(dict(zip(crops.ids, captions)), sort_keys=True, indent=2),
        encoding="utf-8",
    )
    return out


def _described_sentences(job, cache, describer, class_name: str) -> list[str]:
    key = content_key(
        b"describe", prompts.SPECIES_DESCRIPTION_PROMPT, class_name,
        str(job.descriptions_per_class),
    )
    for _ in range(_RETRIES):
        sentences = cache.get_or_compute(
            describer.model_id,
            key,
            lambda: describer.describe(class_name, job.descriptions_per_class),
        )
        sentences = [s for s in sentences if s.strip()]
        if sentences:
            return sentences
        cache.put(describer.model_id, key, None)  # force a retry
    raise EmptyResponseError(
        f"description model returned nothing for {class_name!r} "
        f"after {_RETRIES} attempts"
    )


def build_class_pack(job: ExtractionJob) -> Path:
    """Per class: embedded description sentences plus the 20 rendered
    templates; raw text is stored alongside the matrices."""
    if not job.classes:
        raise EmptyResponseError("job has no classes to describe")
    cache = ModelCache(job.cache_dir)
    encoder = make_encoder(job.encoder)
    describer = make_describer(job.llm)
    pack_dir = job.out_dir / PACK_DIR
    pack_dir.mkdir(parents=True, exist_ok=True)

    def embed_texts(texts: list[str]) -> np.ndarray:
        rows = [
            cache.get_or_compute(
                encoder.model_id,
                content_key(b"text-embed", text),
                lambda text=text: encoder.encode_text(text).tolist(),
            )
            for text in texts
        ]
        return np.asarray(rows, dtype=np.float64)

    entries = []
    raw_descriptions = {}
    raw_templates = {}
    for i, name in enumerate(job.classes):
        sentences = _described_sentences(job, cache, describer, name)
        rendered = [t.format(name) for t in prompts.TEMPLATES]
        raw_descriptions[name] = sentences
        raw_templates[name] = rendered

        llm_file = f"class{i:03d}_llm.wing"
        tpl_file = f"class{i:03d}_template.wing"
        write_wing(
            embed_texts(sentences),
            [f"{name}-llm{k:02d}" for k in range(len(sentences))],
            pack_dir / llm_file,
        )
        write_wing(
            embed_texts(rendered),
            [f"{name}-tpl{k:02d}" for k in range(len(rendered))],
            pack_dir / tpl_file,
        )
        entries.append({"name": name, "llm": llm_file, "template": tpl_file})

    write_pack(pack_dir, entries)
    (pack_dir / "descriptions.json").write_text(
        json.dumps(raw_descriptions, sort_keys=True, indent=2), encoding="utf-8"
    )
    (pack_dir / "templates.json").write_text(
        json.dumps(raw_templates, sort_keys=True, indent=2), encoding="utf-8"
    )
    return pack_dir


def run_job(job: ExtractionJob) -> dict:
    """All three stages; returns the paths written."""
    images = extract_image_embeddings(job)
    captions = extract_caption_embeddings(job)
    pack = build_class_pack(job) if job.classes else None
    return {"images": images, "captions": captions, "pack": pack}

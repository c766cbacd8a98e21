"""Model backends behind string identifiers.

Every stage of the pipeline resolves its backend by identifier, so jobs
are plain data and tests can run without any model weights. The builtin
backends are fully deterministic (content-hash driven); identifiers that
would need real models raise the corresponding *Unavailable* error with
a hint about what to install or configure.

Builtin identifiers:

- detectors: ``fullframe`` (one whole-image box, confidence 1.0) and
  ``quadrants`` (four boxes with content-derived confidences, useful to
  exercise the confidence threshold);
- encoders: ``hash:<dim>`` (token-hash bag-of-words for text, content
  hash for pixels; unit-normalized);
- captioners: ``stub-vlm`` (caption phrased from image statistics);
- describers: ``stub-llm`` (per-class sentence bank, deterministic).
"""

from __future__ import annotations

import hashlib
import re

import numpy as np
from PIL import Image

from .errors import (
    DetectorUnavailableError,
    EncoderUnavailableError,
    LLMUnavailableError,
)


def _seeded_unit_vector(seed_material: bytes, dim: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(seed_material).digest()[:8], "little")
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


# --- detectors ----------------------------------------------------------------

class FullFrameDetector:
    """One detection covering the whole image, confidence 1.0."""

    model_id = "fullframe"

    def detect(self, image: Image.Image, content: bytes):
        return [((0, 0, image.width, image.height), 1.0)]


class QuadrantDetector:
    """Four quadrant boxes with deterministic content-derived confidences."""

    model_id = "quadrants"

    def detect(self, image: Image.Image, content: bytes):
        w2, h2 = image.width // 2, image.height // 2
        boxes = [
            (0, 0, w2, h2),
            (w2, 0, image.width, h2),
            (0, h2, w2, image.height),
            (w2, h2, image.width, image.height),
        ]
        out = []
        for k, box in enumerate(boxes):
            digest = hashlib.sha256(content + bytes([k])).digest()
            out.append((box, digest[0] / 255.0))
        return out


def make_detector(identifier: str):
    if identifier == "fullframe":
        return FullFrameDetector()
    if identifier == "quadrants":
        return QuadrantDetector()
    raise DetectorUnavailableError(
        f"no detector backend for {identifier!r}; builtins: fullframe, quadrants"
    )


# --- encoders -----------------------------------------------------------------

class HashEncoder:
    """Deterministic encoder: token-hash vectors for text, content hash for pixels.

    Texts sharing tokens land near each other (the embedding is the
    normalized mean of per-token unit vectors), which is enough structure
    for end-to-end pipeline tests.
    """

    def __init__(self, dim: int):
        if dim < 2:
            raise EncoderUnavailableError(f"hash encoder dim must be >= 2, got {dim}")
        self.dim = dim
        self.model_id = f"hash:{dim}"

    def encode_text(self, text: str) -> np.ndarray:
        tokens = re.findall(r"[a-z0-9]+", text.lower()) or ["<empty>"]
        acc = np.zeros(self.dim)
        for token in tokens:
            acc += _seeded_unit_vector(b"text:" + token.encode("utf-8"), self.dim)
        norm = np.linalg.norm(acc)
        if norm < 1e-12:
            return _seeded_unit_vector(b"text-fallback:" + text.encode(), self.dim)
        return acc / norm

    def encode_image(self, image: Image.Image) -> np.ndarray:
        rgb = image.convert("RGB")
        material = rgb.size[0].to_bytes(4, "little") + rgb.size[1].to_bytes(4, "little")
        return _seeded_unit_vector(b"image:" + material + rgb.tobytes(), self.dim)


def make_encoder(identifier: str):
    if identifier.startswith("hash:"):
        return HashEncoder(int(identifier.split(":", 1)[1]))
    raise EncoderUnavailableError(
        f"no encoder backend for {identifier!r}; builtin: hash:<dim> "
        f"(real encoders plug in behind this registry)"
    )


# --- captioners ---------------------------------------------------------------

_BRIGHTNESS = ("dark", "dim", "bright")
_TEXTURE = ("smooth", "patterned", "speckled")
_TINT = {"r": "reddish brown", "g": "olive gray", "b": "slate blue"}


class StubCaptioner:
    """Caption phrased from coarse image statistics; deterministic."""

    model_id = "stub-vlm"

    def caption(self, image: Image.Image, content: bytes) -> str:
        rgb = np.asarray(image.convert("RGB"), dtype=np.float64)
        brightness = _BRIGHTNESS[min(int(rgb.mean() / 86), 2)]
        texture = _TEXTURE[min(int(rgb.std() / 40), 2)]
        tint = _TINT["rgb"[int(np.argmax(rgb.mean(axis=(0, 1))))]]
        return (
            f"a {brightness} photograph of an animal with a {tint} coat "
            f"and {texture} markings, standing in natural vegetation."
        )


def make_captioner(identifier: str):
    if identifier == "stub-vlm":
        return StubCaptioner()
    raise EncoderUnavailableError(
        f"no captioning backend for {identifier!r}; builtin: stub-vlm"
    )


# --- describers ---------------------------------------------------------------

_SENTENCES = (
    "a {name} is an animal with a distinctive overall silhouette.",
    "the coat of a {name} shows {adj} coloration across the back.",
    "a {name} has {adj} limbs suited to its habitat.",
    "the head of a {name} is {adj} with alert eyes.",
    "a {name} carries a {adj} tail.",
    "the ears of a {name} are {adj} and mobile.",
    "a {name} shows a {adj} pattern along its flanks.",
    "the muzzle of a {name} is {adj} and tapered.",
    "a {name} stands with a {adj} posture.",
    "the underside of a {name} is {adj} compared to its back.",
    "a {name} has a {adj} neck and shoulders.",
    "the feet of a {name} leave {adj} tracks.",
)

_ADJECTIVES = (
    "pale", "dark", "striped", "spotted", "uniform", "mottled",
    "slender", "robust", "short", "elongated", "broad", "narrow",
)


class StubDescriber:
    """Deterministic per-class sentence bank keyed by the class name."""

    model_id = "stub-llm"

    def describe(self, class_name: str, count: int) -> list[str]:
        digest = hashlib.sha256(b"describe:" + class_name.encode("utf-8")).digest()
        out = []
        for i in range(count):
            sentence = _SENTENCES[i % len(_SENTENCES)]
            adj = _ADJECTIVES[digest[i % len(digest)] % len(_ADJECTIVES)]
            out.append(sentence.format(name=class_name, adj=adj))
        return out


def make_describer(identifier: str):
    if identifier == "stub-llm":
        return StubDescriber()
    raise LLMUnavailableError(
        f"no description backend for {identifier!r}; builtin: stub-llm"
    )

"""Extraction stages, caching, and the cross-package round trip.

The recognition side is exercised strictly through its public surface:
the `wingfuse` CLI (subprocess) and the files on disk.
"""

import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from wingextract import (
    DetectorUnavailableError,
    EmptyResponseError,
    EncoderUnavailableError,
    ExtractionJob,
    LLMUnavailableError,
    build_class_pack,
    extract_image_embeddings,
    load_job,
    run_job,
)
from wingextract.errors import JobError
from wingextract.models import make_captioner, make_describer, make_detector, make_encoder
from wingextract.prompts import TEMPLATES

CLASSES = ("lion", "zebra")


def wingfuse(*args):
    """Invoke the recognition CLI as a separate process."""
    return subprocess.run(
        [sys.executable, "-m", "wingfuse.cli", *args],
        capture_output=True, text=True,
    )


def make_images(root, per_class=5, size=24):
    """Tiny deterministic PNGs, one subdirectory per class."""
    rng = np.random.default_rng(99)
    for c, name in enumerate(CLASSES):
        directory = root / name
        directory.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            base = np.zeros((size, size, 3), dtype=np.uint8)
            base[..., c % 3] = 140 + 20 * c
            base += rng.integers(0, 60, size=base.shape, dtype=np.uint8)
            Image.fromarray(base).save(directory / f"shot{i:02d}.png")


@pytest.fixture(scope="module")
def extraction(tmp_path_factory):
    root = tmp_path_factory.mktemp("extract")
    images = root / "images"
    make_images(images)
    job = ExtractionJob(
        image_dir=images, out_dir=root / "out", classes=CLASSES,
        encoder="hash:32", split="train",
    )
    written = run_job(job)
    return {"root": root, "job": job, **written}


class TestOutputsPassPrimaryValidation:
    def test_ingest_check_accepts_all_outputs(self, extraction):
        result = wingfuse(
            "ingest", "--check",
            str(extraction["images"]), str(extraction["captions"]),
            str(extraction["pack"]),
        )
        assert result.returncode == 0, result.stderr
        assert result.stdout.count("OK ") == 3

    def test_rows_align_between_images_and_captions(self, extraction):
        img_manifest = json.loads(
            (extraction["images"].parent / "images.wing.manifest.json").read_text()
        )
        cap_manifest = json.loads(
            (extraction["captions"].parent / "captions.wing.manifest.json").read_text()
        )
        assert img_manifest["ids"] == cap_manifest["ids"]
        assert img_manifest["labels"] == cap_manifest["labels"]
        assert all("#" in sample_id for sample_id in img_manifest["ids"])

    def test_pack_row_counts(self, extraction):
        pack_dir = extraction["pack"]
        listing = json.loads((pack_dir / "pack.json").read_text())
        assert [c["name"] for c in listing["classes"]] == list(CLASSES)
        for entry in listing["classes"]:
            header = (pack_dir / entry["template"]).read_bytes()[:24]
            rows = int.from_bytes(header[8:16], "little")
            assert rows == 20  # one row per rendered template
            header = (pack_dir / entry["llm"]).read_bytes()[:24]
            rows = int.from_bytes(header[8:16], "little")
            assert rows == 12  # descriptions_per_class default

    def test_templates_render_the_class_name(self, extraction):
        rendered = json.loads((extraction["pack"] / "templates.json").read_text())
        assert len(TEMPLATES) == 20
        for name in CLASSES:
            assert len(rendered[name]) == 20
            assert all(name in t for t in rendered[name])

    def test_captions_sidecar_is_audit_ready(self, extraction):
        captions = json.loads(
            (extraction["job"].out_dir / "captions.json").read_text()
        )
        assert len(captions) == 10
        assert all(isinstance(text, str) and text for text in captions.values())


class TestSmokeRoundTrip:
    def test_ten_image_extraction_feeds_a_full_eval(self, extraction, tmp_path):
        out = extraction["job"].out_dir
        centroids = tmp_path / "centroids.wing"
        result = wingfuse(
            "centroids", "--pack", str(out / "pack"), "--beta", "1.0",
            "--out", str(centroids),
        )
        assert result.returncode == 0, result.stderr

        model = tmp_path / "model.json"
        result = wingfuse(
            "train",
            "--images", str(out / "images.wing"),
            "--captions", str(out / "captions.wing"),
            "--centroids", str(centroids),
            "--val-fraction", "0.2", "--batch", "4", "--epochs", "3",
            "--hidden", "8", "--seed", "1", "--out", str(model),
        )
        assert result.returncode == 0, result.stderr

        metrics = tmp_path / "metrics.json"
        result = wingfuse(
            "eval",
            "--model", str(model),
            "--images", str(out / "images.wing"),
            "--captions", str(out / "captions.wing"),
            "--centroids", str(centroids),
            "--out", str(metrics),
        )
        assert result.returncode == 0, result.stderr
        doc = json.loads(metrics.read_text())
        assert 0.0 <= doc["accuracy"] <= 1.0
        assert doc["n_samples"] == 10


class TestDeterminismAndCaching:
    def test_rerun_is_byte_identical(self, tmp_path):
        images = tmp_path / "imgs"
        make_images(images, per_class=3)

        def run(out_name):
            job = ExtractionJob(
                image_dir=images, out_dir=tmp_path / out_name, classes=CLASSES,
                encoder="hash:16",
            )
            run_job(job)
            return {
                p.relative_to(job.out_dir).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(job.out_dir.rglob("*"))
                if p.is_file() and ".cache" not in p.parts
            }

        assert run("out1") == run("out2")

    def test_rerun_in_place_hits_cache_and_changes_nothing(self, tmp_path):
        images = tmp_path / "imgs"
        make_images(images, per_class=2)
        job = ExtractionJob(
            image_dir=images, out_dir=tmp_path / "out", classes=CLASSES,
            encoder="hash:16",
        )
        run_job(job)
        before = (job.out_dir / "images.wing").read_bytes()
        cache_files = sorted((job.out_dir / ".cache").rglob("*.json"))
        assert cache_files
        run_job(job)
        assert (job.out_dir / "images.wing").read_bytes() == before


class TestDetectionThreshold:
    def test_quadrant_detector_drops_low_confidence_crops(self, tmp_path):
        images = tmp_path / "imgs"
        make_images(images, per_class=4, size=32)
        accepted = {}
        for threshold in (0.0, 0.7):
            job = ExtractionJob(
                image_dir=images, out_dir=tmp_path / f"out{threshold}",
                classes=CLASSES, detector="quadrants", encoder="hash:16",
                confidence_threshold=threshold,
            )
            path = extract_image_embeddings(job)
            manifest = json.loads((path.parent / "images.wing.manifest.json").read_text())
            accepted[threshold] = len(manifest["ids"])
        assert accepted[0.0] == 8 * 4  # every quadrant of every image
        assert 0 < accepted[0.7] < accepted[0.0]

    def test_empty_directory_gives_empty_outputs(self, tmp_path):
        (tmp_path / "none").mkdir()
        job = ExtractionJob(
            image_dir=tmp_path / "none", out_dir=tmp_path / "out", encoder="hash:16"
        )
        path = extract_image_embeddings(job)
        header = path.read_bytes()[:24]
        assert int.from_bytes(header[8:16], "little") == 0
        result = wingfuse("ingest", "--check", str(path))
        assert result.returncode == 0

    def test_unreadable_image_is_skipped_and_recorded(self, tmp_path):
        images = tmp_path / "imgs"
        make_images(images, per_class=2)
        (images / "lion" / "broken.png").write_bytes(b"not a png at all")
        job = ExtractionJob(
            image_dir=images, out_dir=tmp_path / "out", classes=CLASSES,
            encoder="hash:16",
        )
        path = extract_image_embeddings(job)
        manifest = json.loads((path.parent / "images.wing.manifest.json").read_text())
        assert len(manifest["ids"]) == 4
        assert manifest["skipped"][0]["file"] == "lion/broken.png"
        log = json.loads((job.out_dir / "extraction_log.json").read_text())
        assert log["skipped"] == manifest["skipped"]
        # the primary side ignores the extra manifest key
        assert wingfuse("ingest", "--check", str(path)).returncode == 0


class TestBackendsAndJobs:
    def test_unavailable_backends_raise_their_own_errors(self):
        with pytest.raises(DetectorUnavailableError):
            make_detector("megadetector-v5")
        with pytest.raises(EncoderUnavailableError):
            make_encoder("open-vocab-encoder-xl")
        with pytest.raises(EncoderUnavailableError):
            make_captioner("llava-1.5-7b")
        with pytest.raises(LLMUnavailableError):
            make_describer("gpt-3.5-turbo")

    def test_empty_response_retried_then_hard_error(self, tmp_path, monkeypatch):
        job = ExtractionJob(
            image_dir=tmp_path, out_dir=tmp_path / "out", classes=("ghost",),
            encoder="hash:16",
        )

        class Silent:
            model_id = "stub-llm"

            def describe(self, name, count):
                return ["", "  "]

        import wingextract.pipeline as pipeline

        monkeypatch.setattr(pipeline, "make_describer", lambda _: Silent())
        with pytest.raises(EmptyResponseError):
            build_class_pack(job)

    def test_job_file_round_trip(self, tmp_path):
        doc = {
            "image_dir": str(tmp_path / "imgs"),
            "out_dir": str(tmp_path / "out"),
            "classes": ["lion"],
            "confidence_threshold": 0.5,
            "encoder": "hash:32",
            "vlm_options": {"temperature": 0.2, "max_tokens": 256},
        }
        path = tmp_path / "job.json"
        path.write_text(json.dumps(doc))
        job = load_job(path)
        assert job.confidence_threshold == 0.5
        assert job.vlm_options == {"temperature": 0.2, "max_tokens": 256}

    def test_job_validation(self, tmp_path):
        path = tmp_path / "job.json"
        path.write_text(json.dumps({"image_dir": "x"}))
        with pytest.raises(JobError):
            load_job(path)
        path.write_text(json.dumps({"image_dir": "x", "out_dir": "y", "bogus": 1}))
        with pytest.raises(JobError):
            load_job(path)

    def test_vlm_options_recorded_in_log(self, tmp_path):
        images = tmp_path / "imgs"
        make_images(images, per_class=1)
        job = ExtractionJob(
            image_dir=images, out_dir=tmp_path / "out", classes=CLASSES,
            encoder="hash:16", vlm_options={"temperature": 0.0},
        )
        extract_image_embeddings(job)
        log = json.loads((job.out_dir / "extraction_log.json").read_text())
        assert log["vlm_options"] == {"temperature": 0.0}

    def test_deterministic_encoder_is_stable(self):
        enc = make_encoder("hash:24")
        a = enc.encode_text("a lion with a tawny coat")
        b = enc.encode_text("a lion with a tawny coat")
        np.testing.assert_array_equal(a, b)
        # shared tokens pull texts together vs an unrelated sentence
        near = float(a @ enc.encode_text("the lion has a tawny mane"))
        far = float(a @ enc.encode_text("gearbox assembly torque settings"))
        assert near > far

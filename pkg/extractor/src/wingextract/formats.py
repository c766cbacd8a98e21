"""Writers for the WING wire formats consumed by the training side.

This package talks to the recognition pipeline exclusively through its
file formats, so the binary layout is implemented here independently:
magic ``WING``, version u16 = 1, flags u16 = 0, rows u64, dim u64, then
rows*dim float32 little-endian, row-major. Sidecar manifest JSON at
``<path>.manifest.json``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sHHQQ")


def write_wing(data: np.ndarray, ids: list[str], path: str | Path, *,
               labels: list[str] | None = None, split: str | None = None,
               extra: dict | None = None) -> None:
    """Write one embedding file plus its manifest sidecar."""
    path = Path(path)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"embedding data must be 2-D, got shape {data.shape}")
    if len(ids) != data.shape[0]:
        raise ValueError(f"{len(ids)} ids for {data.shape[0]} rows")
    if not np.all(np.isfinite(data)):
        raise ValueError("refusing to write non-finite embedding values")
    payload = data.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"WING", 1, 0, data.shape[0], data.shape[1]))
        fh.write(payload)
    manifest: dict = {"ids": list(ids)}
    if labels is not None:
        manifest["labels"] = list(labels)
    if split is not None:
        manifest["split"] = split
    if extra:
        manifest.update(extra)
    manifest_path(path).write_text(
        json.dumps(manifest, sort_keys=True, indent=0), encoding="utf-8"
    )


def manifest_path(wing_path: str | Path) -> Path:
    p = Path(wing_path)
    return p.with_name(p.name + ".manifest.json")


def write_pack(directory: str | Path, entries: list[dict]) -> None:
    """Write ``pack.json``; per-class files must already exist.

    Each entry: {"name": ..., "llm": "<file>", "template": "<file>"?}.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "pack.json").write_text(
        json.dumps({"classes": entries}, sort_keys=True, indent=2), encoding="utf-8"
    )

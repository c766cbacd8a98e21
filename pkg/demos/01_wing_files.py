"""Walk through the WING embedding file format.

Writes a small embedding matrix, inspects the bytes on disk, and loads
it back. Run from the repository root:

    python demos/01_wing_files.py
"""

import struct
import tempfile
from pathlib import Path

import numpy as np

from wingfuse import EmbeddingMatrix, load_embedding_file, write_embedding_file

workdir = Path(tempfile.mkdtemp(prefix="wing-demo-"))
path = workdir / "demo.wing"

# Three 4-dimensional embeddings with string ids.
matrix = EmbeddingMatrix(
    np.array(
        [
            [0.25, -1.0, 0.5, 2.0],
            [1.0, 1.0, 0.0, 0.0],
            [-0.5, 0.75, 0.125, -2.5],
        ]
    ),
    ("img-001#0", "img-001#1", "img-002#0"),
)
write_embedding_file(matrix, path)

blob = path.read_bytes()
magic, version, flags, rows, dim = struct.unpack_from("<4sHHQQ", blob, 0)
print(f"file: {path}")
print(f"size: {len(blob)} bytes (24-byte header + {rows}*{dim}*4 payload)")
print(f"header: magic={magic!r} version={version} flags={flags} rows={rows} dim={dim}")
print(f"manifest sidecar: {path.name}.manifest.json")
print((path.parent / f"{path.name}.manifest.json").read_text())

loaded = load_embedding_file(path)
print("ids round-trip:", loaded.ids == matrix.ids)
print("float32 payload round-trips bitwise:",
      loaded.data.astype(np.float32).tobytes() == matrix.data.astype(np.float32).tobytes())

"""On-disk cache for model calls, keyed by (model id, prompt, input).

Every detector/encoder/captioner/describer call routes through here so
interrupted runs resume without re-invoking models, and re-runs on
unchanged inputs are byte-identical. Values are JSON documents under
``<cache_dir>/<model-id-slug>/<sha256>.json``.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path


def content_key(*parts: bytes | str) -> str:
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, str):
            part = part.encode("utf-8")
        digest.update(len(part).to_bytes(8, "little"))
        digest.update(part)
    return digest.hexdigest()


class ModelCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, model_id: str, key: str) -> Path:
        slug = re.sub(r"[^A-Za-z0-9._-]", "_", model_id)
        return self.root / slug / f"{key}.json"

    def get(self, model_id: str, key: str):
        path = self._path(model_id, key)
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        return None

    def put(self, model_id: str, key: str, value) -> None:
        path = self._path(model_id, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(value, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    def get_or_compute(self, model_id: str, key: str, compute):
        cached = self.get(model_id, key)
        if cached is not None:
            return cached
        value = compute()
        self.put(model_id, key, value)
        return value

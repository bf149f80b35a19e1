"""Content-addressed cache for pipeline stage outputs.

Entries are keyed by a digest over (stage name, input payload digest, the
slice of run config the stage depends on) and stored per stage as a
line-delimited JSON file, one entry per line.  Appending is the only write
operation, so caches are diffable, resumable, and safe to grow; when a key
appears twice the last line wins.  A hit returns the stored payload without
recomputation.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from pathlib import Path

from .errors import CacheError

log = logging.getLogger(__name__)


def canonical_json(payload) -> str:
    """Stable serialization used for both digests and storage."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def digest(payload) -> str:
    """Hex digest of a JSON-serializable payload."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def file_digest(path: Path | str) -> str:
    """Hex digest of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class StageCache:
    """Content-addressed store, one JSONL file per stage.

    Concurrent readers are safe once loaded; writers are serialized by a
    process-local lock (one writing process per cache directory is
    assumed).
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        self._index: dict[str, dict] = {}  # stage -> {key: payload}

    def key(self, stage: str, input_digest: str, config_slice: dict) -> str:
        return digest({"stage": stage, "input": input_digest, "config": config_slice})

    def _file(self, stage: str) -> Path:
        return self.root / f"{stage}.jsonl"

    def _load(self, stage: str) -> dict:
        if stage in self._index:
            return self._index[stage]
        entries: dict[str, dict] = {}
        path = self._file(stage)
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        entry = json.loads(line)
                        entries[entry["key"]] = entry["payload"]
                    except (json.JSONDecodeError, KeyError) as exc:
                        raise CacheError(
                            f"corrupt cache line {path}:{lineno}: {exc}"
                        ) from exc
        self._index[stage] = entries
        return entries

    def get(self, stage: str, key: str):
        """Stored payload for (stage, key), or None on a miss."""
        entries = self._load(stage)
        if key in entries:
            self.hits += 1
            return entries[key]
        self.misses += 1
        return None

    def put(self, stage: str, key: str, payload) -> None:
        entry = {"key": key, "created_at": time.time(), "payload": payload}
        line = canonical_json(entry)
        with self._lock:
            with open(self._file(stage), "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
            self._load(stage)[key] = payload

    def get_or_compute(self, stage: str, input_digest: str, config_slice: dict, compute):
        """Return the cached payload or run ``compute()`` and store its result."""
        key = self.key(stage, input_digest, config_slice)
        cached = self.get(stage, key)
        if cached is not None:
            log.debug("cache hit: %s %s", stage, key[:12])
            return cached
        result = compute()
        self.put(stage, key, result)
        return result

"""Content-addressed stage cache."""

import json

import pytest

from paraprobe.cache import StageCache, canonical_json, digest, file_digest
from paraprobe.errors import CacheError


# -- digests -------------------------------------------------------------------


def test_canonical_json_is_key_order_insensitive():
    assert canonical_json({"b": 1, "a": 2}) == canonical_json({"a": 2, "b": 1})


def test_digest_changes_with_content():
    assert digest({"a": 1}) != digest({"a": 2})
    assert digest([1, 2]) != digest([2, 1])


def test_digest_stable_across_processes():
    # sha256 of the canonical serialization; frozen so cache keys survive
    # interpreter restarts
    assert digest({"a": 1}) == (
        "015abd7f5cc57a2dd94b7590f04ad8084273905ee33ec5cebeae62276a97f862"
    )


def test_file_digest_reflects_bytes(tmp_path):
    path = tmp_path / "f.bin"
    path.write_bytes(b"abc")
    first = file_digest(path)
    path.write_bytes(b"abd")
    assert file_digest(path) != first


# -- store ---------------------------------------------------------------------


def test_put_get_roundtrip(tmp_path):
    cache = StageCache(tmp_path / "cache")
    key = cache.key("stage", "input-digest", {"knob": 1})
    assert cache.get("stage", key) is None
    cache.put("stage", key, {"value": [1, 2, 3]})
    assert cache.get("stage", key) == {"value": [1, 2, 3]}
    assert cache.hits == 1 and cache.misses == 1


def test_get_or_compute_runs_once(tmp_path):
    cache = StageCache(tmp_path)
    calls = []

    def compute():
        calls.append(1)
        return {"n": 42}

    for _ in range(3):
        assert cache.get_or_compute("s", "d", {"c": 1}, compute) == {"n": 42}
    assert len(calls) == 1


def test_cache_persists_across_instances(tmp_path):
    first = StageCache(tmp_path)
    first.put("s", first.key("s", "d", {}), "payload")
    second = StageCache(tmp_path)
    assert second.get("s", second.key("s", "d", {})) == "payload"
    assert second.hits == 1


def test_last_write_wins_on_duplicate_keys(tmp_path):
    cache = StageCache(tmp_path)
    key = cache.key("s", "d", {})
    cache.put("s", key, "old")
    cache.put("s", key, "new")
    assert StageCache(tmp_path).get("s", key) == "new"


def test_key_sensitive_to_every_component(tmp_path):
    cache = StageCache(tmp_path)
    base = cache.key("s", "d", {"c": 1})
    assert cache.key("other", "d", {"c": 1}) != base
    assert cache.key("s", "other", {"c": 1}) != base
    assert cache.key("s", "d", {"c": 2}) != base
    assert cache.key("s", "d", {"c": 1}) == base


def test_stage_files_are_jsonl_with_created_at(tmp_path):
    cache = StageCache(tmp_path)
    cache.put("mystage", cache.key("mystage", "d", {}), {"x": 1})
    lines = (tmp_path / "mystage.jsonl").read_text(encoding="utf-8").splitlines()
    entry = json.loads(lines[0])
    assert set(entry) == {"key", "created_at", "payload"}
    assert entry["payload"] == {"x": 1}


def test_corrupt_cache_line_raises(tmp_path):
    (tmp_path / "s.jsonl").write_text("not json\n", encoding="utf-8")
    with pytest.raises(CacheError):
        StageCache(tmp_path).get("s", "any")


def test_blank_lines_tolerated(tmp_path):
    cache = StageCache(tmp_path)
    key = cache.key("s", "d", {})
    cache.put("s", key, 7)
    path = tmp_path / "s.jsonl"
    path.write_text(path.read_text(encoding="utf-8") + "\n\n", encoding="utf-8")
    assert StageCache(tmp_path).get("s", key) == 7

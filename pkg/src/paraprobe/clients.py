"""Pluggable text-generation and embedding clients.

Two abstract surfaces keep every model swappable: TextGenClient (chat-style,
system+user text in, text out) and EmbedClient (texts in, vectors out).
HTTP backends speak the OpenAI-compatible wire format; scripted backends
replay fixtures so the whole pipeline runs offline and deterministically.
API keys come from an environment variable named in the client spec.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from abc import ABC, abstractmethod
from pathlib import Path

import httpx

from .errors import ClientError, ConfigError


class TextGenClient(ABC):
    """Chat-style completion client."""

    model_id: str = ""
    temperature: float = 1.0

    @abstractmethod
    def complete(self, user: str, system: str | None = None) -> str:
        """Return the model's text reply for one request."""

    @property
    def calls(self) -> int:
        """Number of completed requests (used by cache-soundness tests)."""
        return getattr(self, "_calls", 0)

    def _count_call(self) -> None:
        self._calls = self.calls + 1


class EmbedClient(ABC):
    """Text-to-vector client."""

    model_id: str = ""

    @abstractmethod
    def embed(self, texts: list[str]) -> list[list[float]]:
        """Return one vector per input text, in order."""

    @property
    def calls(self) -> int:
        return getattr(self, "_calls", 0)

    def _count_call(self) -> None:
        self._calls = self.calls + 1


class ScriptedTextGenClient(TextGenClient):
    """Replays canned replies chosen by substring match against the prompt.

    ``rules`` is an ordered list of {"match": substring, "responses": [text,
    ...]} entries; the first entry whose substring occurs in the prompt wins.
    Successive hits on the same rule walk its response list (sticking on the
    last one), which lets tests script retry behavior.
    """

    def __init__(self, rules: list[dict], model_id: str = "scripted",
                 temperature: float = 0.0):
        self.model_id = model_id
        self.temperature = temperature
        self._rules = rules
        self._hits = [0] * len(rules)
        self._mutex = threading.Lock()

    @classmethod
    def from_file(cls, path: Path | str, model_id: str = "scripted") -> "ScriptedTextGenClient":
        rules = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(rules, list):
            raise ConfigError(f"transcript {path} must be a JSON array of rules")
        return cls(rules, model_id=model_id)

    def complete(self, user: str, system: str | None = None) -> str:
        with self._mutex:
            self._count_call()
            for i, rule in enumerate(self._rules):
                if rule["match"] in user:
                    responses = rule.get("responses") or [rule.get("response", "")]
                    reply = responses[min(self._hits[i], len(responses) - 1)]
                    self._hits[i] += 1
                    if reply == "<error>":
                        raise ClientError("scripted transport failure")
                    return reply
        raise ClientError(f"no scripted rule matches prompt ({user[:80]!r}...)")


class FlakyTextGenClient(TextGenClient):
    """Fails the first ``failures`` calls, then delegates. Test helper."""

    def __init__(self, inner: TextGenClient, failures: int):
        self._inner = inner
        self._remaining = failures
        self.model_id = inner.model_id
        self.temperature = inner.temperature

    def complete(self, user: str, system: str | None = None) -> str:
        self._count_call()
        if self._remaining > 0:
            self._remaining -= 1
            raise ClientError("injected transport failure")
        return self._inner.complete(user, system)


class HttpChatClient(TextGenClient):
    """OpenAI-compatible chat-completions backend with a concurrency cap."""

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        temperature: float = 1.0,
        api_key_env: str = "",
        max_in_flight: int = 4,
        timeout_s: float = 120.0,
        retries: int = 2,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model_id = model_id
        self.temperature = temperature
        self._api_key = os.environ.get(api_key_env, "") if api_key_env else ""
        if api_key_env and not self._api_key:
            raise ConfigError(f"environment variable {api_key_env} is not set")
        self._semaphore = threading.Semaphore(max_in_flight)
        self._timeout = timeout_s
        self._retries = retries

    def complete(self, user: str, system: str | None = None) -> str:
        messages = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": user})
        payload = {
            "model": self.model_id,
            "temperature": self.temperature,
            "messages": messages,
        }
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        last_error: Exception | None = None
        for attempt in range(self._retries + 1):
            try:
                with self._semaphore:
                    response = httpx.post(
                        f"{self.endpoint}/chat/completions",
                        json=payload,
                        headers=headers,
                        timeout=self._timeout,
                    )
                response.raise_for_status()
                self._count_call()
                return response.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if attempt < self._retries:
                    time.sleep(min(2.0**attempt, 8.0))
        raise ClientError(f"chat request failed after retries: {last_error}")


class ScriptedEmbedClient(EmbedClient):
    """Returns vectors from a {text: vector} fixture mapping."""

    def __init__(self, table: dict[str, list[float]], model_id: str = "scripted-embed"):
        self.model_id = model_id
        self._table = table

    @classmethod
    def from_file(cls, path: Path | str) -> "ScriptedEmbedClient":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def embed(self, texts: list[str]) -> list[list[float]]:
        self._count_call()
        missing = [t for t in texts if t not in self._table]
        if missing:
            raise ClientError(f"no fixture embedding for {missing[0]!r}")
        return [self._table[t] for t in texts]


class HashEmbedClient(EmbedClient):
    """Deterministic pseudo-embeddings derived from a SHA-256 of the text.

    No network, no model: identical texts map to identical vectors (cosine
    1.0) and unrelated texts to near-orthogonal ones.  Used by offline
    fixtures and golden runs.
    """

    def __init__(self, dims: int = 16, model_id: str = "hash-embed"):
        if dims < 2 or dims > 32:
            raise ConfigError("hash embeddings support 2..32 dimensions")
        self.dims = dims
        self.model_id = model_id

    def embed(self, texts: list[str]) -> list[list[float]]:
        self._count_call()
        vectors = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            vec = []
            for i in range(self.dims):
                pair = int.from_bytes(digest[2 * i : 2 * i + 2], "big")
                vec.append(pair / 32767.5 - 1.0)
            vectors.append(vec)
        return vectors


class HttpEmbedClient(EmbedClient):
    """OpenAI-compatible /embeddings backend."""

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        api_key_env: str = "",
        max_in_flight: int = 4,
        timeout_s: float = 60.0,
        retries: int = 2,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model_id = model_id
        self._api_key = os.environ.get(api_key_env, "") if api_key_env else ""
        if api_key_env and not self._api_key:
            raise ConfigError(f"environment variable {api_key_env} is not set")
        self._semaphore = threading.Semaphore(max_in_flight)
        self._timeout = timeout_s
        self._retries = retries

    def embed(self, texts: list[str]) -> list[list[float]]:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {"model": self.model_id, "input": texts}
        last_error: Exception | None = None
        for attempt in range(self._retries + 1):
            try:
                with self._semaphore:
                    response = httpx.post(
                        f"{self.endpoint}/embeddings",
                        json=payload,
                        headers=headers,
                        timeout=self._timeout,
                    )
                response.raise_for_status()
                data = response.json()["data"]
                self._count_call()
                return [item["embedding"] for item in data]
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < self._retries:
                    time.sleep(min(2.0**attempt, 8.0))
        raise ClientError(f"embedding request failed after retries: {last_error}")


def make_textgen_client(spec: dict) -> TextGenClient:
    """Build a TextGenClient from a run-config client spec."""
    kind = spec.get("kind", "openai_chat")
    if kind == "scripted":
        return ScriptedTextGenClient.from_file(
            spec["transcript"], model_id=spec.get("model_id", "scripted")
        )
    if kind == "openai_chat":
        return HttpChatClient(
            endpoint=spec["endpoint"],
            model_id=spec["model_id"],
            temperature=float(spec.get("temperature", 1.0)),
            api_key_env=spec.get("api_key_env", ""),
            max_in_flight=int(spec.get("max_in_flight", 4)),
            timeout_s=float(spec.get("timeout_s", 120.0)),
            retries=int(spec.get("retries", 2)),
        )
    raise ConfigError(f"unknown text client kind {kind!r}")


def make_embed_client(spec: dict) -> EmbedClient:
    """Build an EmbedClient from a run-config client spec."""
    kind = spec.get("kind", "openai_embed")
    if kind == "scripted":
        return ScriptedEmbedClient.from_file(spec["fixture"])
    if kind == "hashed":
        return HashEmbedClient(dims=int(spec.get("dims", 16)))
    if kind == "openai_embed":
        return HttpEmbedClient(
            endpoint=spec["endpoint"],
            model_id=spec["model_id"],
            api_key_env=spec.get("api_key_env", ""),
            max_in_flight=int(spec.get("max_in_flight", 4)),
            timeout_s=float(spec.get("timeout_s", 60.0)),
            retries=int(spec.get("retries", 2)),
        )
    raise ConfigError(f"unknown embed client kind {kind!r}")

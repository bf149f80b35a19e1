"""Pinned parser models.

Every model name maps to a fixed version string; the pair is echoed into a
``# parser = <name> <version>`` comment on each output sentence so a
downstream consumer can verify which ruleset produced a parse.  Output is
deterministic for a fixed (model, version): re-running the adapter on the
same request file yields identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError

#: model name -> pinned version.  "english-rules" is the built-in
#: deterministic rule-based tagger/attacher implemented in parser.py.
PINNED_MODELS = {
    "english-rules": "1.0.0",
}

DEFAULT_MODEL = "english-rules"


@dataclass(frozen=True)
class ParserModel:
    name: str
    version: str

    @property
    def provenance(self) -> str:
        return f"{self.name} {self.version}"


def load_model(name: str) -> ParserModel:
    """Resolve a model name against the pinned registry."""
    if name not in PINNED_MODELS:
        available = ", ".join(sorted(PINNED_MODELS))
        raise ModelError(f"unknown parser model {name!r}; available: {available}")
    return ParserModel(name=name, version=PINNED_MODELS[name])

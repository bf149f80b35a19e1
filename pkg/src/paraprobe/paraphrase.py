"""Schema-conditioned paraphrase generation.

The generation prompt is a text asset with three placeholders
({num_queries}, {schema_definitions}, {sql_query}); build_prompt substitutes
them verbatim and adds nothing else.  Multi-turn examples get their prior
turns prepended to the schema block under a "Dialogue context:" heading.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from importlib import resources

from .clients import TextGenClient
from .errors import GenerationError, NumberedListParseError
from .ingest import Example

log = logging.getLogger(__name__)

_NUMBERED_LINE = re.compile(r"^\s*(\d+)[.)]\s*(.*\S)\s*$")


def prompt_template() -> str:
    """The raw generation template with its placeholders intact."""
    return (
        resources.files("paraprobe.assets")
        .joinpath("paraphrase_prompt.txt")
        .read_text(encoding="utf-8")
    )


@dataclass
class GenConfig:
    num_queries: int = 10
    temperature: float = 1.0
    model_id: str = ""
    max_attempts: int = 3

    def __post_init__(self) -> None:
        if self.num_queries < 1:
            raise ValueError("num_queries must be >= 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass
class ParaphraseSet:
    example_id: str
    candidates: list[str]  # generation order
    generator_model: str
    shortfall: int  # requested minus produced


def build_prompt(example: Example, config: GenConfig) -> str:
    """Fill the template for one example; deterministic for fixed inputs."""
    schema_block = example.schema_text
    if example.context_turns:
        turns = "\n".join(example.context_turns)
        schema_block = f"Dialogue context:\n{turns}\n\n{schema_block}"
    return (
        prompt_template()
        .replace("{num_queries}", str(config.num_queries))
        .replace("{schema_definitions}", schema_block)
        .replace("{sql_query}", example.gold_sql)
    )


def parse_numbered_list(raw: str, expected: int) -> list[str]:
    """Extract "<k>. <question>" lines for k = 1..expected, in order.

    Numbering must advance from 1; trailing prose after the list is
    tolerated.  Returns at most ``expected`` items; raises if nothing
    parses.
    """
    if expected < 1:
        raise ValueError("expected must be >= 1")
    items: list[str] = []
    for line in raw.splitlines():
        match = _NUMBERED_LINE.match(line)
        if not match:
            continue
        k = int(match.group(1))
        if k == len(items) + 1 and k <= expected:
            items.append(match.group(2).strip())
    if not items:
        raise NumberedListParseError("no numbered-list items found", raw=raw)
    return items


def generate_paraphrases(
    example: Example, client: TextGenClient, config: GenConfig
) -> ParaphraseSet:
    """Generate up to num_queries paraphrase candidates for one example.

    On parse shortfall the client is re-asked (up to max_attempts total
    attempts) and distinct new candidates are merged; duplicates are removed
    case-insensitively.  Transport and parse failures only become a
    GenerationError when every attempt failed to produce a single candidate.
    """
    prompt = build_prompt(example, config)
    candidates: list[str] = []
    seen: set[str] = set()
    errors: list[str] = []
    for attempt in range(1, config.max_attempts + 1):
        try:
            raw = client.complete(prompt)
            parsed = parse_numbered_list(raw, expected=config.num_queries)
        except NumberedListParseError as exc:
            errors.append(f"attempt {attempt}: parse error")
            log.warning("%s: attempt %d parse error; raw reply logged: %r",
                        example.id, attempt, exc.raw[:500])
            continue
        except Exception as exc:
            errors.append(f"attempt {attempt}: {exc}")
            log.warning("%s: attempt %d client error: %s", example.id, attempt, exc)
            continue
        for text in parsed:
            key = text.strip().lower()
            if key and key not in seen:
                seen.add(key)
                candidates.append(text)
        if len(candidates) >= config.num_queries:
            break
    if not candidates:
        raise GenerationError(
            f"{example.id}: no paraphrases after {config.max_attempts} attempts "
            f"({'; '.join(errors)})"
        )
    candidates = candidates[: config.num_queries]
    return ParaphraseSet(
        example_id=example.id,
        candidates=candidates,
        generator_model=client.model_id,
        shortfall=config.num_queries - len(candidates),
    )

"""Run configuration: YAML schema, validation, and path resolution.

Paths in the config stay exactly as written (usually relative); they are
resolved against the config file's directory only at the point of use, so
a config snapshot embedded in run outputs is stable across machines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .ingest import FORMATS

RANK_FILTERS = ("all", "ge3")


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return mapping[key]


def _as_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping")
    return value


@dataclass(frozen=True)
class BenchmarkConfig:
    path: str
    format: str

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchmarkConfig":
        raw = _as_mapping(raw, "benchmark")
        fmt = _require(raw, "format", "benchmark")
        if fmt not in FORMATS:
            raise ConfigError(f"benchmark.format must be one of {FORMATS}, got {fmt!r}")
        return cls(path=str(_require(raw, "path", "benchmark")), format=fmt)


@dataclass(frozen=True)
class GenerationConfig:
    client: dict
    num_queries: int = 10
    temperature: float = 1.0
    max_attempts: int = 3

    @classmethod
    def from_dict(cls, raw: dict) -> "GenerationConfig":
        raw = _as_mapping(raw, "generation")
        cfg = cls(
            client=_as_mapping(_require(raw, "client", "generation"), "generation.client"),
            num_queries=int(raw.get("num_queries", 10)),
            temperature=float(raw.get("temperature", 1.0)),
            max_attempts=int(raw.get("max_attempts", 3)),
        )
        if cfg.num_queries < 1:
            raise ConfigError("generation.num_queries must be >= 1")
        if cfg.max_attempts < 1:
            raise ConfigError("generation.max_attempts must be >= 1")
        return cfg


@dataclass(frozen=True)
class ParseConfig:
    files: tuple[str, ...]

    @classmethod
    def from_dict(cls, raw: dict) -> "ParseConfig":
        raw = _as_mapping(raw, "parses")
        files = _require(raw, "files", "parses")
        if not isinstance(files, list) or not files:
            raise ConfigError("parses.files must be a non-empty list")
        return cls(files=tuple(str(f) for f in files))


@dataclass(frozen=True)
class FilterSettings:
    client: dict
    cosine_threshold: float
    jaccard_bins: tuple[tuple[float, float], ...] = ((0.0, 0.2), (0.2, 0.4))
    length_bins: int = 10

    @classmethod
    def from_dict(cls, raw: dict) -> "FilterSettings":
        raw = _as_mapping(raw, "filter")
        threshold = float(_require(raw, "cosine_threshold", "filter"))
        if not 0.0 <= threshold <= 1.0:
            raise ConfigError("filter.cosine_threshold must lie in [0, 1]")
        bins_raw = raw.get("jaccard_bins", [[0.0, 0.2], [0.2, 0.4]])
        if not isinstance(bins_raw, list) or not all(
            isinstance(b, list) and len(b) == 2 for b in bins_raw
        ):
            raise ConfigError("filter.jaccard_bins must be a list of [lo, hi] pairs")
        return cls(
            client=_as_mapping(_require(raw, "client", "filter"), "filter.client"),
            cosine_threshold=threshold,
            jaccard_bins=tuple((float(lo), float(hi)) for lo, hi in bins_raw),
            length_bins=int(raw.get("length_bins", 10)),
        )


@dataclass(frozen=True)
class EvaluationConfig:
    """Paired evaluation settings; ranks covered are always 1..num_queries."""

    models: tuple[dict, ...]
    timeout_s: float = 30.0
    row_cap: int = 100_000

    @classmethod
    def from_dict(cls, raw: dict) -> "EvaluationConfig":
        raw = _as_mapping(raw, "evaluation")
        models = _require(raw, "models", "evaluation")
        if not isinstance(models, list) or not models:
            raise ConfigError("evaluation.models must be a non-empty list")
        cfg = cls(
            models=tuple(_as_mapping(m, "evaluation.models[]") for m in models),
            timeout_s=float(raw.get("timeout_s", 30.0)),
            row_cap=int(raw.get("row_cap", 100_000)),
        )
        for model in cfg.models:
            if "model_id" not in model:
                raise ConfigError("every evaluation model needs a model_id")
        if cfg.timeout_s <= 0:
            raise ConfigError("evaluation.timeout_s must be positive")
        return cfg


@dataclass(frozen=True)
class StatsConfig:
    bootstrap_samples: int = 100
    seed: int = 13
    rank_filters: tuple[str, ...] = ("all", "ge3")

    @classmethod
    def from_dict(cls, raw: dict) -> "StatsConfig":
        raw = _as_mapping(raw, "stats")
        filters = tuple(raw.get("rank_filters", ["all", "ge3"]))
        for f in filters:
            if f not in RANK_FILTERS:
                raise ConfigError(f"stats.rank_filters entries must be in {RANK_FILTERS}")
        cfg = cls(
            bootstrap_samples=int(raw.get("bootstrap_samples", 100)),
            seed=int(raw.get("seed", 13)),
            rank_filters=filters,
        )
        if cfg.bootstrap_samples < 1:
            raise ConfigError("stats.bootstrap_samples must be >= 1")
        return cfg


@dataclass(frozen=True)
class RunConfig:
    benchmark: BenchmarkConfig
    generation: GenerationConfig
    parses: ParseConfig
    filter: FilterSettings
    evaluation: EvaluationConfig
    stats: StatsConfig
    out_dir: str = "out"
    cache_dir: str = "cache"
    workers: int = 1
    base_dir: str = "."
    raw: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str = ".") -> "RunConfig":
        raw = _as_mapping(raw, "config")
        workers = int(raw.get("workers", 1))
        if workers < 1:
            raise ConfigError("workers must be >= 1")
        return cls(
            benchmark=BenchmarkConfig.from_dict(_require(raw, "benchmark", "config")),
            generation=GenerationConfig.from_dict(_require(raw, "generation", "config")),
            parses=ParseConfig.from_dict(_require(raw, "parses", "config")),
            filter=FilterSettings.from_dict(_require(raw, "filter", "config")),
            evaluation=EvaluationConfig.from_dict(_require(raw, "evaluation", "config")),
            stats=StatsConfig.from_dict(raw.get("stats", {})),
            out_dir=str(raw.get("out_dir", "out")),
            cache_dir=str(raw.get("cache_dir", "cache")),
            workers=workers,
            base_dir=base_dir,
            raw=raw,
        )

    def resolve(self, path: str) -> Path:
        """Resolve a config-relative path against the config file's directory."""
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p


def load_config(path: Path | str) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return RunConfig.from_dict(raw, base_dir=str(path.parent))

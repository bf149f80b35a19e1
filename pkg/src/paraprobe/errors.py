"""Exception hierarchy for the paraprobe toolkit.

Every stage raises a subclass of ParaprobeError so the pipeline can tell
per-example failures (logged, example skipped) apart from fatal ones.
"""


class ParaprobeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ParaprobeError):
    """Run configuration is missing, malformed, or references absent paths."""


class IngestError(ParaprobeError):
    """A benchmark dev-set file is missing or cannot be parsed."""


class SchemaError(ParaprobeError):
    """A database file is unreadable or its schema cannot be rendered."""


class GenerationError(ParaprobeError):
    """Paraphrase generation failed for an example after all retries."""


class NumberedListParseError(ParaprobeError):
    """A model reply contained no parsable numbered-list items."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class ConlluParseError(ParaprobeError):
    """A CoNLL-U line is malformed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TreeStructureError(ParaprobeError):
    """A dependency graph is not a single-rooted tree."""


class NumericError(ParaprobeError):
    """Invalid numeric input (dimension mismatch, zero vector, ...)."""


class TokenizationError(ParaprobeError):
    """A text produced no tokens."""


class FilterError(ParaprobeError):
    """Embedding-based filtering failed for an example."""


class PredictionError(ParaprobeError):
    """The NL2SQL client returned nothing usable for a question."""


class SqlExecutionError(ParaprobeError):
    """Predicted or gold SQL failed to execute."""


class SqlTimeoutError(SqlExecutionError):
    """Query exceeded the per-query timeout."""


class SqlTruncationError(SqlExecutionError):
    """Query produced more rows than the configured cap."""


class StatisticsError(ParaprobeError):
    """Not enough data points for the requested statistic."""


class CalibrationError(ParaprobeError):
    """Threshold calibration was requested before paraphrases exist."""


class ClientError(ParaprobeError):
    """A text-generation or embedding client failed after retries."""


class CacheError(ParaprobeError):
    """A cache entry is unreadable."""

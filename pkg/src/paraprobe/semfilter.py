"""Embedding-based paraphrase filtering and lexical-control statistics.

The tokenizer used for Jaccard overlap and length counts is deliberately
simple and reproducible: lowercase, split on Unicode whitespace, strip
leading/trailing punctuation from each piece, drop empties.  No stopword
removal.  Pass a different callable to override it.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import FilterError, NumericError, TokenizationError
from .ranking import RankedParaphrase

Tokenizer = Callable[[str], list[str]]

DEFAULT_JACCARD_BINS: list[tuple[float, float]] = [(0.0, 0.2), (0.2, 0.4)]


@dataclass
class FilterConfig:
    """Semantic-filter settings.

    ``cosine_threshold`` has no default on purpose: the operator picks it
    from the distribution printed by the ``calibrate`` subcommand.
    ``jaccard_bins`` are half-open [lo, hi) intervals, non-overlapping and
    ascending.
    """

    cosine_threshold: float
    embed_model_id: str = ""
    jaccard_bins: list[tuple[float, float]] = field(
        default_factory=lambda: list(DEFAULT_JACCARD_BINS)
    )
    length_bins: int = 10

    def __post_init__(self) -> None:
        bins = [tuple(b) for b in self.jaccard_bins]
        for lo, hi in bins:
            if not lo < hi:
                raise ValueError(f"empty bin [{lo}, {hi})")
        for (_, hi), (lo, _) in zip(bins, bins[1:]):
            if lo < hi:
                raise ValueError("jaccard bins must be non-overlapping and ascending")
        self.jaccard_bins = bins


@dataclass(frozen=True)
class OverlapRecord:
    """Jaccard overlap and token lengths for one (example, rank) pair."""

    example_id: str
    rank: int
    jaccard: float
    orig_len: int
    para_len: int


def _strip_punct(piece: str) -> str:
    start, end = 0, len(piece)
    while start < end and unicodedata.category(piece[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(piece[end - 1]).startswith("P"):
        end -= 1
    return piece[start:end]


def tokenize(text: str) -> list[str]:
    """Default tokenizer: lowercase, whitespace split, edge punctuation stripped."""
    tokens = []
    for piece in text.lower().split():
        stripped = _strip_punct(piece)
        if stripped:
            tokens.append(stripped)
    return tokens


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """u.v / (|u||v|), in [-1, 1]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise NumericError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise NumericError("cosine similarity undefined for zero vector")
    value = float(np.dot(u, v) / (nu * nv))
    return max(-1.0, min(1.0, value))


def apply_cosine_filter(
    ranked: list[RankedParaphrase],
    original_text: str,
    client,
    config: FilterConfig,
) -> list[RankedParaphrase]:
    """Fill cosine-vs-original for every paraphrase and set the retained flag.

    Ranks are not reassigned: filtering leaves gaps in the retained rank set.
    ``client`` is any EmbedClient; failures surface as FilterError so the
    caller can exclude the example and keep going.
    """
    try:
        vectors = client.embed([original_text] + [p.text for p in ranked])
    except Exception as exc:  # client errors become per-example filter errors
        raise FilterError(f"embedding failed: {exc}") from exc
    original_vec = vectors[0]
    for paraphrase, vec in zip(ranked, vectors[1:]):
        paraphrase.cosine = cosine_similarity(original_vec, vec)
        paraphrase.retained = paraphrase.cosine >= config.cosine_threshold
    return ranked


def jaccard(a: str, b: str, tokenizer: Tokenizer = tokenize) -> float:
    """Set-based token overlap |A∩B| / |A∪B|."""
    ta, tb = set(tokenizer(a)), set(tokenizer(b))
    if not ta or not tb:
        raise TokenizationError("input tokenizes to zero tokens")
    return len(ta & tb) / len(ta | tb)


def overlap_record(
    example_id: str,
    rank: int,
    original: str,
    paraphrase: str,
    tokenizer: Tokenizer = tokenize,
) -> OverlapRecord:
    orig_tokens = tokenizer(original)
    para_tokens = tokenizer(paraphrase)
    if not orig_tokens or not para_tokens:
        raise TokenizationError("input tokenizes to zero tokens")
    return OverlapRecord(
        example_id=example_id,
        rank=rank,
        jaccard=len(set(orig_tokens) & set(para_tokens))
        / len(set(orig_tokens) | set(para_tokens)),
        orig_len=len(orig_tokens),
        para_len=len(para_tokens),
    )


def _histogram(
    values: list[float], bins: list[tuple[float, float]]
) -> list[tuple[float, float, int]]:
    rows = []
    for lo, hi in bins:
        rows.append((lo, hi, sum(1 for v in values if lo <= v < hi)))
    return rows


def length_bins(values: Iterable[int], count: int) -> list[tuple[float, float]]:
    """Equal-width bins spanning the observed length range.

    A degenerate range (all values equal) collapses to one unit-width bin.
    """
    values = list(values)
    lo, hi = min(values), max(values)
    if lo == hi:
        return [(float(lo), float(lo + 1))]
    width = (hi - lo) / count
    edges = [lo + i * width for i in range(count)]
    bins = [(edges[i], edges[i + 1]) for i in range(count - 1)]
    # last bin is closed on the right so the maximum lands in it
    bins.append((edges[-1], hi + 1e-9))
    return bins


def distribution_tables(
    records: list[OverlapRecord],
    ranks: set[int],
    config: FilterConfig,
) -> dict[str, list[tuple[int, float, float, int]]]:
    """Binned counts of paraphrase lengths and Jaccard overlap per rank.

    Returns {"length": rows, "jaccard": rows} with rows of
    (rank, bin_lo, bin_hi, count), ready to be written as CSV and plotted
    as per-rank densities.  Jaccard values outside the configured bins are
    not counted.  An empty rank selection yields empty tables.
    """
    tables: dict[str, list[tuple[int, float, float, int]]] = {
        "length": [],
        "jaccard": [],
    }
    selected = [r for r in records if r.rank in ranks]
    if not selected:
        return tables
    lbins = length_bins([r.para_len for r in selected], config.length_bins)
    for rank in sorted(ranks):
        at_rank = [r for r in selected if r.rank == rank]
        if not at_rank:
            continue
        for lo, hi, n in _histogram([float(r.para_len) for r in at_rank], lbins):
            tables["length"].append((rank, lo, hi, n))
        for lo, hi, n in _histogram([r.jaccard for r in at_rank], config.jaccard_bins):
            tables["jaccard"].append((rank, lo, hi, n))
    return tables

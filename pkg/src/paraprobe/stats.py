"""Rank-sensitivity statistics: Kendall's tau and percentile bootstrap CIs.

The tau here is tau-a: (n_c - n_d) / (n(n-1)/2) with the fixed denominator,
so ties attenuate |tau| rather than being corrected for.  The bootstrap
resamples the supplied (rank, delta) points with replacement and reports the
empirical 2.5th/97.5th percentiles with linear interpolation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import StatisticsError

log = logging.getLogger(__name__)

Point = tuple[int, float]


@dataclass(frozen=True)
class TauEstimate:
    tau: float
    n: int
    n_c: int
    n_d: int


@dataclass
class TauReport:
    """Tau estimate plus bootstrap CI for one model/dataset/rank-filter cell."""

    model_id: str
    dataset: str
    rank_filter: str  # "all" or "ge3"
    estimate: TauEstimate
    ci_lo: float
    ci_hi: float
    B: int
    seed: int
    resamples: list[float]
    point_outside_ci: bool = False


def kendall_tau(points: list[Point]) -> TauEstimate:
    """Tau-a over all unordered pairs.

    Concordant when (rank_i - rank_j)(delta_i - delta_j) > 0, discordant
    when < 0; ties in either coordinate count toward neither.
    """
    n = len(points)
    if n < 2:
        raise StatisticsError(f"kendall_tau needs at least 2 points, got {n}")
    n_c = n_d = 0
    for i in range(n):
        rank_i, delta_i = points[i]
        for j in range(i + 1, n):
            rank_j, delta_j = points[j]
            product = (rank_i - rank_j) * (delta_i - delta_j)
            if product > 0:
                n_c += 1
            elif product < 0:
                n_d += 1
    denom = n * (n - 1) / 2
    return TauEstimate(tau=(n_c - n_d) / denom, n=n, n_c=n_c, n_d=n_d)


def bootstrap_ci(
    points: list[Point], B: int, seed: int
) -> tuple[float, float, list[float]]:
    """Percentile bootstrap of tau over with-replacement resamples.

    Each of the B resamples draws n points with replacement; its statistic
    is tau over the distinct points drawn, since a duplicate draw of the
    same (rank, delta) pair would otherwise register as a spurious self-tie
    under the fixed-denominator tau.  Resamples with fewer than 2 distinct
    points score 0 by convention (logged).  Returns (2.5th percentile,
    97.5th percentile, all resample taus) with linear interpolation between
    order statistics.  Deterministic for a fixed (points, B, seed).
    """
    n = len(points)
    if n < 2:
        raise StatisticsError(f"bootstrap_ci needs at least 2 points, got {n}")
    if B < 1:
        raise StatisticsError(f"B must be >= 1, got {B}")
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, n, size=(B, n))
    resamples: list[float] = []
    degenerate = 0
    for b in range(B):
        distinct = sorted({points[i] for i in indices[b]})
        if len(distinct) < 2:
            degenerate += 1
            resamples.append(0.0)
            continue
        resamples.append(kendall_tau(distinct).tau)
    if degenerate:
        log.info("bootstrap: %d/%d degenerate resamples scored tau*=0", degenerate, B)
    lo, hi = np.percentile(resamples, [2.5, 97.5], method="linear")
    return float(lo), float(hi), resamples


def tau_report(
    records,
    rank_filter: str,
    B: int,
    seed: int,
    model_id: str = "",
    dataset: str = "",
) -> TauReport:
    """Estimate tau between rank and delta over paired-eval records.

    ``rank_filter`` is "all" or "ge3" (keep rank >= 3).  ``records`` is any
    iterable with ``rank`` and ``delta`` attributes.
    """
    if rank_filter not in ("all", "ge3"):
        raise ValueError(f"unknown rank filter {rank_filter!r}")
    kept = [r for r in records if rank_filter == "all" or r.rank >= 3]
    if len(kept) < 2:
        raise StatisticsError(
            f"need at least 2 records after filter {rank_filter!r}, got {len(kept)}"
        )
    points = [(r.rank, r.delta) for r in kept]
    estimate = kendall_tau(points)
    lo, hi, resamples = bootstrap_ci(points, B=B, seed=seed)
    outside = not (lo <= estimate.tau <= hi)
    if outside:
        log.warning(
            "point estimate %.4f lies outside percentile band [%.4f, %.4f]",
            estimate.tau,
            lo,
            hi,
        )
    return TauReport(
        model_id=model_id,
        dataset=dataset,
        rank_filter=rank_filter,
        estimate=estimate,
        ci_lo=lo,
        ci_hi=hi,
        B=B,
        seed=seed,
        resamples=resamples,
        point_outside_ci=outside,
    )


@dataclass(frozen=True)
class CurvePoint:
    rank: int
    n: int
    accuracy: float


@dataclass
class StratifiedCurve:
    """Accuracy-by-rank curve for one Jaccard-overlap bin ('all' = unfiltered)."""

    bin_label: str
    points: list[CurvePoint]
    tau: TauEstimate | None


def stratified_curves(
    outcomes,
    bins: list[tuple[float, float]],
) -> list[StratifiedCurve]:
    """Per-bin accuracy-by-rank curves plus the unfiltered curve.

    ``outcomes`` is an iterable with ``rank``, ``jaccard`` and ``correct``
    attributes (one entry per evaluated paraphrase).  Bins with no items are
    omitted with a notice.  A bin whose items cover fewer than 2 ranks gets
    tau=None.
    """
    outcomes = list(outcomes)
    selections: list[tuple[str, list]] = [("all", outcomes)]
    for lo, hi in bins:
        label = f"{lo:g}-{hi:g}"
        members = [o for o in outcomes if lo <= o.jaccard < hi]
        if not members:
            log.info("jaccard bin [%s) empty; omitted", label)
            continue
        selections.append((label, members))
    curves = []
    for label, members in selections:
        by_rank: dict[int, list] = {}
        for o in members:
            by_rank.setdefault(o.rank, []).append(o)
        points = [
            CurvePoint(
                rank=rank,
                n=len(items),
                accuracy=sum(1 for o in items if o.correct) / len(items),
            )
            for rank, items in sorted(by_rank.items())
        ]
        tau = None
        if len(points) >= 2:
            tau = kendall_tau([(p.rank, p.accuracy) for p in points])
        curves.append(StratifiedCurve(bin_label=label, points=points, tau=tau))
    return curves

"""Batch toolkit for probing NL2SQL benchmark sensitivity to paraphrase rank.

The pipeline generates schema-conditioned paraphrases of benchmark
questions, ranks them by dependency-tree edit distance, filters them by
embedding similarity, re-evaluates models with paired execution accuracy,
and quantifies the accuracy-vs-rank trend with Kendall's tau plus bootstrap
confidence intervals.
"""

from ._version import __version__
from .conllu import DepNode, DepTree, node_label, read_conllu
from .ranking import RankedParaphrase, rank_paraphrases
from .semfilter import FilterConfig, cosine_similarity, jaccard, tokenize
from .stats import bootstrap_ci, kendall_tau, tau_report
from .ted import ted, ted_normalized

__all__ = [
    "__version__",
    "DepNode",
    "DepTree",
    "node_label",
    "read_conllu",
    "RankedParaphrase",
    "rank_paraphrases",
    "FilterConfig",
    "cosine_similarity",
    "jaccard",
    "tokenize",
    "bootstrap_ci",
    "kendall_tau",
    "tau_report",
    "ted",
    "ted_normalized",
]

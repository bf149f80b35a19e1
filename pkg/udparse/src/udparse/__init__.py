"""udparse: rule-based dependency parsing adapter producing CoNLL-U.

Reads line-delimited JSON parse requests and writes one CoNLL-U sentence
block per request sentence, in order, with the pinned parser model and
version echoed into a ``# parser`` comment on every block.
"""

from ._version import __version__
from .errors import ModelError, RequestError, UdparseError
from .models import DEFAULT_MODEL, PINNED_MODELS, ParserModel, load_model
from .parser import (
    ConlluResult,
    ParsedSentence,
    Token,
    parse_sentence,
    parse_to_conllu,
    render_sentence,
    tokenize,
)
from .requests import read_requests

__all__ = [
    "__version__",
    "ConlluResult",
    "DEFAULT_MODEL",
    "ModelError",
    "PINNED_MODELS",
    "ParsedSentence",
    "ParserModel",
    "RequestError",
    "Token",
    "UdparseError",
    "load_model",
    "parse_sentence",
    "parse_to_conllu",
    "read_requests",
    "render_sentence",
    "tokenize",
]

"""Deterministic rule-based English dependency parsing to CoNLL-U.

The "english-rules" model is a closed-class lexicon plus suffix heuristics
for part-of-speech tagging and a small set of attachment rules that always
produce a single-rooted, acyclic tree:

- the root is the last verb, falling back to the first noun (after the
  first auxiliary when one exists) and then to the first non-punctuation
  token;
- determiners, adjectives, and numbers attach to the nearest noun on their
  right; adpositions attach to the nearest verb/nominal on their left and
  receive their nominal as an object; remaining nominals attach to the
  root as subject (left of it) or object (right of it);
- every other tag attaches to the root.

Rightward links land only on nouns, leftward links move strictly toward
the sentence start, and everything else points at the root, so no cycle
can form.  A sentence that cannot be processed (no tokens) is rendered as
a comment-only block carrying an ``# error`` line; CoNLL-U readers that
iterate word lines skip such blocks while the sentence order of the
remaining output is preserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .models import ParserModel

# words keep internal apostrophes; any other non-space character is its
# own punctuation token
_TOKEN_RE = re.compile(r"[A-Za-z0-9']+|[^A-Za-z0-9\s]")

_DETERMINERS = {
    "the", "a", "an", "this", "that", "these", "those", "each", "every",
    "all", "any", "some", "no", "which", "both", "either", "neither",
}
_PRONOUNS = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us",
    "them", "there", "who", "whom", "whose", "what",
}
_AUXILIARIES = {
    "do", "does", "did", "is", "are", "was", "were", "am", "be", "been",
    "being", "will", "would", "can", "could", "shall", "should", "may",
    "might", "must",
}
_ADPOSITIONS = {
    "in", "on", "at", "by", "for", "with", "from", "to", "of", "over",
    "under", "between", "among", "into", "onto", "within", "without",
    "about", "above", "below", "across", "per", "during", "through",
    "against", "after", "before",
}
_COORDINATORS = {"and", "or", "but", "nor"}
_SUBORDINATORS = {"how", "if", "whether", "because", "while", "since", "than", "as"}
_WH_ADVERBS = {"when", "where", "why"}
_PARTICLES = {"not"}
_ADJECTIVES = {
    "many", "much", "few", "several", "more", "most", "fewer", "least",
    "total", "average", "maximum", "minimum", "distinct", "different",
    "oldest", "youngest", "highest", "lowest", "largest", "smallest",
    "latest", "earliest", "other",
}
_VERB_STEMS = {
    "show", "list", "find", "display", "return", "give", "get", "tell",
    "retrieve", "fetch", "provide", "identify", "include", "contain",
    "appear", "exist", "belong", "hold", "perform", "play", "sing",
    "record", "store", "sort", "rank", "share", "attend", "sell", "cost",
}
_PAST_PARTICIPLES = {"been", "done", "gone", "made", "held", "sold", "sung"}
_LEMMA_IRREGULAR = {
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be",
    "been": "be", "being": "be",
    "does": "do", "did": "do", "done": "do", "doing": "do",
    "has": "have", "had": "have", "having": "have",
}

_TRANSPARENT = {"DET", "ADJ", "NUM", "ADV", "PART", "SCONJ"}


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    upos: str


@dataclass(frozen=True)
class ParsedSentence:
    """One parsed sentence; ``error`` is nonempty when parsing failed."""

    sent_id: str
    text: str
    tokens: tuple[Token, ...]
    heads: tuple[int, ...]  # 1-based token id of the head, 0 for the root
    deprels: tuple[str, ...]
    error: str = ""


@dataclass(frozen=True)
class ConlluResult:
    """Rendered document plus sentence bookkeeping."""

    text: str
    sentences: int
    failed: int


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def _is_word(form: str) -> bool:
    return any(ch.isalnum() for ch in form)


def _strip_3sg(word: str) -> str:
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("es") and len(word) > 3:
        return word[:-2]
    if word.endswith("s") and not word.endswith("ss") and len(word) > 3:
        return word[:-1]
    return word


def tag(forms: Sequence[str]) -> list[str]:
    """UPOS per token from the lexicon, with suffix-based fallbacks."""
    tags: list[str] = []
    for i, form in enumerate(forms):
        if not _is_word(form):
            tags.append("PUNCT")
            continue
        word = form.lower()
        if any(ch.isdigit() for ch in word):
            tags.append("NUM")
        elif word in _PARTICLES:
            tags.append("PART")
        elif word in _DETERMINERS:
            tags.append("DET")
        elif word in _PRONOUNS:
            tags.append("PRON")
        elif word in ("have", "has", "had"):
            # auxiliary before a past participle, main verb otherwise
            following = next((f.lower() for f in forms[i + 1:] if _is_word(f)), "")
            participle = following.endswith("ed") or following in _PAST_PARTICIPLES
            tags.append("AUX" if participle else "VERB")
        elif word in _AUXILIARIES:
            tags.append("AUX")
        elif word in _ADPOSITIONS:
            tags.append("ADP")
        elif word in _COORDINATORS:
            tags.append("CCONJ")
        elif word in _SUBORDINATORS:
            tags.append("SCONJ")
        elif word in _WH_ADVERBS:
            tags.append("ADV")
        elif word in _ADJECTIVES:
            tags.append("ADJ")
        elif word in _VERB_STEMS or _strip_3sg(word) in _VERB_STEMS:
            tags.append("VERB")
        elif word.endswith("ed") and len(word) > 3:
            tags.append("VERB")
        elif word.endswith("ing") and len(word) > 4:
            tags.append("VERB")
        elif word.endswith("ly") and len(word) > 3:
            tags.append("ADV")
        else:
            tags.append("NOUN")
    return tags


def lemmatize(form: str, upos: str) -> str:
    if upos in ("PUNCT", "NUM"):
        return form
    word = form.lower()
    if word in _LEMMA_IRREGULAR:
        return _LEMMA_IRREGULAR[word]
    if word.endswith("'s"):
        word = word[:-2]
    if upos == "NOUN":
        if word.endswith("ies") and len(word) > 4:
            return word[:-3] + "y"
        if word.endswith("es") and len(word) > 3 and (
            word[-3] in "sxz" or word[-4:-2] in ("ch", "sh")
        ):
            return word[:-2]
        if (
            word.endswith("s")
            and len(word) > 3
            and not word.endswith(("ss", "us", "is"))
        ):
            return word[:-1]
        return word
    if upos == "VERB":
        if word.endswith("ied") and len(word) > 4:
            return word[:-3] + "y"
        if word.endswith("ed") and len(word) > 3:
            return word[:-2]
        if word.endswith("ing") and len(word) > 4:
            return word[:-3]
        if word.endswith("s") and not word.endswith("ss") and len(word) > 3:
            return _strip_3sg(word)
        return word
    return word


def _pick_root(tags: Sequence[str]) -> int:
    verbs = [i for i, t in enumerate(tags) if t == "VERB"]
    if verbs:
        return verbs[-1]
    nouns = [i for i, t in enumerate(tags) if t == "NOUN"]
    if nouns:
        aux = next((i for i, t in enumerate(tags) if t == "AUX"), None)
        if aux is not None:
            after = [i for i in nouns if i > aux]
            if after:
                return after[0]
        return nouns[0]
    for i, t in enumerate(tags):
        if t != "PUNCT":
            return i
    return 0


def _nearest_right_noun(tags: Sequence[str], i: int) -> int | None:
    for j in range(i + 1, len(tags)):
        if tags[j] == "NOUN":
            return j
    return None


def _modified_right_noun(tags: Sequence[str], i: int) -> int | None:
    """Noun a number modifies: reachable crossing only DET/ADJ tokens.

    Numbers that fail this (e.g. "in 2020") fall back to nominal
    attachment; an unrestricted rightward scan could cross an adposition
    that itself attaches leftward to the number, closing a cycle.
    """
    for j in range(i + 1, len(tags)):
        if tags[j] == "NOUN":
            return j
        if tags[j] not in ("DET", "ADJ"):
            return None
    return None


def _nominal_left_attach(tags: Sequence[str], i: int) -> tuple[int, str] | None:
    """Head for a nominal: its adposition, or a conjoined earlier nominal."""
    conjoined = False
    for j in range(i - 1, -1, -1):
        t = tags[j]
        if t in _TRANSPARENT:
            continue
        if t in ("CCONJ", "PUNCT"):
            conjoined = True
            continue
        if t == "ADP":
            return j, "pobj"
        if t in ("NOUN", "PRON") and conjoined:
            return j, "conj"
        return None
    return None


def attach(tags: Sequence[str]) -> tuple[list[int], list[str]]:
    """Heads (1-based, 0 for root) and dependency relations per token."""
    root = _pick_root(tags)
    heads: list[int] = []
    deprels: list[str] = []
    for i, t in enumerate(tags):
        if i == root:
            heads.append(0)
            deprels.append("root")
            continue
        head, deprel = root, "dep"
        if t == "PUNCT":
            deprel = "punct"
        elif t in ("DET", "ADJ"):
            right = _nearest_right_noun(tags, i)
            deprel = "det" if t == "DET" else "amod"
            if right is not None:
                head = right
        elif t == "NUM":
            right = _modified_right_noun(tags, i)
            if right is not None:
                head, deprel = right, "nummod"
            else:
                found = _nominal_left_attach(tags, i)
                if found:
                    head, deprel = found
                else:
                    deprel = "nsubj" if i < root else "obj"
        elif t == "ADP":
            deprel = "prep"
            for j in range(i - 1, -1, -1):
                if tags[j] in ("VERB", "NOUN", "PRON", "NUM"):
                    head = j
                    break
        elif t == "AUX":
            deprel = "aux"
        elif t == "SCONJ":
            deprel = "mark"
            if i + 1 < len(tags):
                head = i + 1
        elif t == "CCONJ":
            deprel = "cc"
        elif t in ("PART", "ADV"):
            deprel = "advmod"
        elif t in ("NOUN", "PRON"):
            found = _nominal_left_attach(tags, i)
            if found:
                head, deprel = found
            else:
                deprel = "nsubj" if i < root else "obj"
        elif t == "VERB":
            deprel = "conj"
        heads.append(head + 1)
        deprels.append(deprel)
    return heads, deprels


def parse_sentence(sent_id: str, text: str) -> ParsedSentence:
    forms = tokenize(text)
    if not forms:
        return ParsedSentence(
            sent_id=sent_id, text=text, tokens=(), heads=(), deprels=(),
            error="no tokens after tokenization",
        )
    tags = tag(forms)
    tokens = tuple(
        Token(form=form, lemma=lemmatize(form, upos), upos=upos)
        for form, upos in zip(forms, tags)
    )
    heads, deprels = attach(tags)
    return ParsedSentence(
        sent_id=sent_id, text=text, tokens=tokens,
        heads=tuple(heads), deprels=tuple(deprels),
    )


def _comment_safe(value: str) -> str:
    return re.sub(r"\s+", " ", value).strip()


def render_sentence(sentence: ParsedSentence, model: ParserModel) -> str:
    lines = [
        f"# sent_id = {_comment_safe(sentence.sent_id)}",
        f"# text = {_comment_safe(sentence.text)}",
        f"# parser = {model.provenance}",
    ]
    if sentence.error:
        lines.append(f"# error = {_comment_safe(sentence.error)}")
        return "\n".join(lines)
    for i, token in enumerate(sentence.tokens):
        lines.append(
            "\t".join(
                [
                    str(i + 1), token.form, token.lemma, token.upos, "_", "_",
                    str(sentence.heads[i]), sentence.deprels[i], "_", "_",
                ]
            )
        )
    return "\n".join(lines)


def parse_to_conllu(rows: Sequence[tuple[str, str]], model: ParserModel) -> ConlluResult:
    """Parse (sent_id, text) rows into one CoNLL-U document, order preserved."""
    sentences = [parse_sentence(sent_id, text) for sent_id, text in rows]
    blocks = [render_sentence(s, model) for s in sentences]
    return ConlluResult(
        text="\n\n".join(blocks) + "\n",
        sentences=len(sentences),
        failed=sum(1 for s in sentences if s.error),
    )

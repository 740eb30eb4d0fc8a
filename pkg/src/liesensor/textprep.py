"""Message text normalization and vocabulary construction.

The normalization rules are frozen: lowercase, strip URLs and @-mentions,
drop the ``#`` character (hashtag word kept), collapse any run of three or
more identical letters to exactly two, and squeeze whitespace. Digits are
never collapsed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from liesensor.errors import ChecksumError, DataFormatError

# An ordered list of lowercase word tokens.
TokenizedDoc = list[str]

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@\w+")
# [^\W\d_] = any Unicode letter; digits repeat freely ("2000" stays).
_LETTER_RUN_RE = re.compile(r"([^\W\d_])\1{2,}")
_WS_RE = re.compile(r"\s+")
_TOKEN_SPLIT_RE = re.compile(r"[\W_]+")

_VOWELS = set("aeiou")


def normalize_text(raw: str) -> str:
    """Normalize a raw message. Total over Unicode strings; idempotent."""
    text = raw.lower()
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = text.replace("#", "")
    text = _LETTER_RUN_RE.sub(r"\1\1", text)
    text = _WS_RE.sub(" ", text).strip()
    return text


def tokenize(normalized: str) -> TokenizedDoc:
    """Split normalized text on runs of non-alphanumeric characters."""
    return [t for t in _TOKEN_SPLIT_RE.split(normalized) if t]


def _has_vowel(stem: str) -> bool:
    return any(ch in _VOWELS for ch in stem)


def _lemmatize_once(token: str) -> str:
    if token.endswith("ies"):
        return token[:-3] + "y"
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) > 3:
        return token[:-1]
    if token.endswith("ing") and _has_vowel(token[:-3]):
        return token[:-3]
    if token.endswith("ed") and _has_vowel(token[:-2]):
        return token[:-2]
    return token


def lemmatize(token: str) -> str:
    """Reduce a lowercase token by the frozen suffix rules.

    Rules are applied to a fixpoint so the result is idempotent:
    ``ies -> y``, ``sses -> ss``, trailing ``s`` dropped (length > 3, not
    ``ss``-final), ``ing``/``ed`` stripped when a vowel remains in the stem.
    """
    while True:
        reduced = _lemmatize_once(token)
        if reduced == token:
            return token
        token = reduced


def lemmatize_doc(tokens: TokenizedDoc) -> TokenizedDoc:
    return [lemmatize(t) for t in tokens]


def prepare_text(raw: str) -> TokenizedDoc:
    """Full prediction-time path: normalize, tokenize, lemmatize."""
    return lemmatize_doc(tokenize(normalize_text(raw)))


@dataclass
class Vocabulary:
    """Term-to-index mapping with document frequencies.

    Indices are dense, assigned in descending corpus frequency with
    lexicographic tie break, and stable under serialization round-trip.
    """

    term_to_index: dict[str, int]
    document_frequency: dict[str, int]
    min_count: int
    _terms: list[str] = field(init=False, repr=False)

    def __post_init__(self):
        terms = [""] * len(self.term_to_index)
        for term, idx in self.term_to_index.items():
            terms[idx] = term
        self._terms = terms

    def __len__(self) -> int:
        return len(self.term_to_index)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index

    def index(self, term: str) -> int:
        return self.term_to_index[term]

    def term(self, index: int) -> str:
        return self._terms[index]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    def dumps(self) -> str:
        lines = [f"{len(self)}\t{self.min_count}"]
        for idx, term in enumerate(self._terms):
            lines.append(f"{term}\t{idx}\t{self.document_frequency[term]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())

    @classmethod
    def loads(cls, text: str) -> "Vocabulary":
        lines = text.splitlines()
        if not lines:
            raise DataFormatError("empty vocabulary file")
        head = lines[0].split("\t")
        if len(head) != 2:
            raise DataFormatError(f"bad vocabulary header {lines[0]!r}")
        try:
            declared, min_count = int(head[0]), int(head[1])
        except ValueError:
            raise DataFormatError(f"bad vocabulary header {lines[0]!r}") from None
        term_to_index: dict[str, int] = {}
        doc_freq: dict[str, int] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataFormatError(f"bad vocabulary line {lineno}: {line!r}")
            term, idx, df = parts[0], int(parts[1]), int(parts[2])
            if idx != lineno - 2:
                raise DataFormatError(f"non-dense index {idx} at line {lineno}")
            term_to_index[term] = idx
            doc_freq[term] = df
        if len(term_to_index) != declared:
            raise ChecksumError(
                f"vocabulary declares {declared} terms but file has {len(term_to_index)}"
            )
        return cls(term_to_index, doc_freq, min_count)


def build_vocabulary(docs: list[TokenizedDoc], min_count: int = 2) -> Vocabulary:
    """Build the pruned vocabulary over lemmatized documents.

    Terms with total corpus frequency below ``min_count`` are removed (rare
    words carry little sentiment signal). Raises ValueError if nothing
    survives the threshold.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    corpus_freq: dict[str, int] = {}
    doc_freq: dict[str, int] = {}
    for doc in docs:
        for tok in doc:
            corpus_freq[tok] = corpus_freq.get(tok, 0) + 1
        for tok in set(doc):
            doc_freq[tok] = doc_freq.get(tok, 0) + 1
    kept = [t for t, c in corpus_freq.items() if c >= min_count]
    if not kept:
        raise ValueError("empty vocabulary: no term reaches min_count")
    kept.sort(key=lambda t: (-corpus_freq[t], t))
    term_to_index = {t: i for i, t in enumerate(kept)}
    return Vocabulary(
        term_to_index=term_to_index,
        document_frequency={t: doc_freq[t] for t in kept},
        min_count=min_count,
    )

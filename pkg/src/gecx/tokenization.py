"""Tokenization, truecasing, and word-class maps."""

from __future__ import annotations

import string
from typing import Iterable

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DataFormatError, TrainingDataError
from .validation import check_sentence

_PUNCT = frozenset(string.punctuation)

# Clitics split off as separate tokens, longest suffixes first so that
# "n't" wins over a bare "'t".
CONTRACTIONS = ("'re", "'ve", "'ll", "n't", "'s", "'d", "'m")


def tokenize(line: str) -> list[str]:
    """Split a raw text line into tokens.

    Whitespace separates chunks.  Leading and trailing runs of ASCII
    punctuation come off each chunk as single tokens, and English clitic
    suffixes ('s, n't, ...) are detached.  The output re-tokenizes to
    itself, so already-tokenized text passes through unchanged.
    """
    tokens: list[str] = []
    for chunk in line.split():
        tokens.extend(_split_chunk(chunk))
    return tokens


def _split_chunk(chunk: str) -> list[str]:
    if not chunk:
        return []
    lowered = chunk.lower()
    if lowered in CONTRACTIONS:
        return [chunk]
    if all(ch in _PUNCT for ch in chunk):
        return [chunk]
    head = 0
    while chunk[head] in _PUNCT:
        head += 1
    if head:
        return [chunk[:head]] + _split_chunk(chunk[head:])
    tail = len(chunk)
    while chunk[tail - 1] in _PUNCT:
        tail -= 1
    if tail < len(chunk):
        return _split_chunk(chunk[:tail]) + [chunk[tail:]]
    for suffix in CONTRACTIONS:
        if len(chunk) > len(suffix) and lowered.endswith(suffix):
            cut = len(chunk) - len(suffix)
            return _split_chunk(chunk[:cut]) + [chunk[cut:]]
    return [chunk]


class Truecaser(BaseEstimator, TransformerMixin):
    """Restore the preferred casing of sentence-initial tokens.

    Casing statistics are collected from every non-initial token position
    at fit time; ``transform`` then rewrites only the first token of each
    sentence, and only when its lowercased form was observed in training.
    """

    def fit(self, X: Iterable[Iterable[str]], y=None):
        counts: dict[str, dict[str, int]] = {}
        n_sentences = 0
        for sentence in X:
            toks = check_sentence(sentence)
            n_sentences += 1
            for token in toks[1:]:
                variants = counts.setdefault(token.lower(), {})
                variants[token] = variants.get(token, 0) + 1
        if n_sentences == 0:
            raise TrainingDataError("truecaser: no training sentences")
        self.counts_ = counts
        return self

    def best_casing(self, form: str) -> str | None:
        """Most frequent observed casing of ``form`` (ties: lexicographically
        smallest), or None when the lowercased form is unknown."""
        check_is_fitted(self, "counts_")
        variants = self.counts_.get(form.lower())
        if not variants:
            return None
        top = max(variants.values())
        return min(v for v, c in variants.items() if c == top)

    def truecase(self, sentence: Iterable[str]) -> list[str]:
        toks = check_sentence(sentence)
        if not toks:
            return []
        best = self.best_casing(toks[0])
        if best is None:
            return list(toks)
        return [best] + list(toks[1:])

    def transform(self, X: Iterable[Iterable[str]]) -> list[list[str]]:
        return [self.truecase(s) for s in X]

    def to_file(self, path) -> None:
        check_is_fitted(self, "counts_")
        with open(path, "w", encoding="utf-8") as fh:
            for variants in self.counts_.values():
                for surface in sorted(variants):
                    fh.write(f"{surface}\t{variants[surface]}\n")

    @classmethod
    def from_file(cls, path) -> "Truecaser":
        counts: dict[str, dict[str, int]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 2:
                    raise DataFormatError(
                        "expected 'surface<TAB>count'", path=path, line=lineno
                    )
                surface, count_text = fields
                try:
                    count = int(count_text)
                except ValueError:
                    raise DataFormatError(
                        f"count is not an integer: {count_text!r}",
                        path=path,
                        line=lineno,
                    ) from None
                if count < 1:
                    raise DataFormatError(
                        f"count must be >= 1, got {count}", path=path, line=lineno
                    )
                variants = counts.setdefault(surface.lower(), {})
                variants[surface] = variants.get(surface, 0) + count
        model = cls()
        model.counts_ = counts
        return model


class WordClassMap:
    """Word to class-id lookup, made total by a reserved unknown class."""

    UNKNOWN = "UNK-CLASS"

    def __init__(self, mapping: dict[str, str] | None = None):
        self._map = dict(mapping or {})
        if self.UNKNOWN in self._map:
            raise ValueError(f"{self.UNKNOWN!r} is reserved and cannot be mapped")

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, word: str) -> bool:
        return word in self._map

    def __getitem__(self, word: str) -> str:
        return self._map.get(word, self.UNKNOWN)

    def class_of(self, word: str) -> str:
        return self[word]

    @property
    def classes(self) -> set[str]:
        """All class ids the map can produce, including the unknown class."""
        return set(self._map.values()) | {self.UNKNOWN}

    @classmethod
    def from_file(cls, path) -> "WordClassMap":
        mapping: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 2 or not fields[0] or not fields[1]:
                    raise DataFormatError(
                        "expected 'word<TAB>class-id'", path=path, line=lineno
                    )
                mapping[fields[0]] = fields[1]
        return cls(mapping)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for word in sorted(self._map):
                fh.write(f"{word}\t{self._map[word]}\n")


def load_word_classes(path) -> WordClassMap:
    """Read a tab-separated word/class-id file into a :class:`WordClassMap`."""
    return WordClassMap.from_file(path)

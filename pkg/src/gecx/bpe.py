"""Byte-pair-encoding subword segmentation.

Merges are learned on whole words with a separate end-of-word sentinel
symbol; segmented output marks every non-final fragment with a trailing
``@@`` so that segmentation can be undone exactly.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DataFormatError, TrainingDataError
from .validation import check_sentence

EOW = "</w>"
MARKER = "@@"


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    """Combine every left-to-right non-overlapping occurrence of ``pair``."""
    first, second = pair
    out: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == first and symbols[i + 1] == second:
            out.append(first + second)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


class BpeSegmenter(BaseEstimator, TransformerMixin):
    """Learn and apply byte-pair-encoding merges.

    Parameters
    ----------
    num_merges:
        Upper bound on the number of merge operations to learn.  Learning
        also stops as soon as the most frequent symbol pair occurs fewer
        than twice.
    """

    def __init__(self, num_merges: int = 50000):
        self.num_merges = num_merges

    def fit(self, X: Iterable[Iterable[str]], y=None):
        if self.num_merges < 0:
            raise ValueError(f"num_merges must be >= 0, got {self.num_merges}")
        word_freq: Counter[str] = Counter()
        for sentence in X:
            word_freq.update(check_sentence(sentence))
        if not word_freq:
            raise TrainingDataError("bpe: no training tokens")

        vocab: dict[tuple[str, ...], int] = {
            tuple(word) + (EOW,): freq for word, freq in word_freq.items()
        }
        merges: list[tuple[str, str]] = []
        for _ in range(self.num_merges):
            pairs: Counter[tuple[str, str]] = Counter()
            for symbols, freq in vocab.items():
                for pair in zip(symbols, symbols[1:]):
                    pairs[pair] += freq
            if not pairs:
                break
            top = max(pairs.values())
            if top < 2:
                break
            best = min(p for p, c in pairs.items() if c == top)
            merges.append(best)
            vocab = {_merge_word(s, best): f for s, f in vocab.items()}

        self.merges_ = merges
        self._reset_cache()
        return self

    def _reset_cache(self):
        self._cache: dict[str, tuple[str, ...]] = {}
        self._symbols = set()
        for a, b in self.merges_:
            self._symbols.add(a)
            self._symbols.add(b)

    def _symbolize(self, token: str) -> tuple[str, ...]:
        """Replay the learned merges, in order, over one token."""
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        symbols = tuple(token) + (EOW,)
        present = set(symbols)
        for pair in self.merges_:
            if len(symbols) == 1:
                break
            if pair[0] not in present or pair[1] not in present:
                continue
            merged = _merge_word(symbols, pair)
            if len(merged) != len(symbols):
                symbols = merged
                present = set(symbols)
        self._cache[token] = symbols
        return symbols

    def segment_token(self, token: str) -> list[str]:
        """Split one token into fragments, ``@@``-marked except the last."""
        check_is_fitted(self, "merges_")
        symbols = self._symbolize(token)
        if symbols[-1] == EOW:
            units = list(symbols[:-1])
        else:
            units = list(symbols[:-1]) + [symbols[-1][: -len(EOW)]]
        return [u + MARKER for u in units[:-1]] + [units[-1]]

    def fragment_count(self, token: str) -> int:
        """Number of fragments ``segment_token`` produces for ``token``."""
        return len(self.segment_token(token))

    def segment(self, sentence: Iterable[str]) -> list[str]:
        toks = check_sentence(sentence)
        out: list[str] = []
        for token in toks:
            out.extend(self.segment_token(token))
        return out

    def desegment(self, sentence: Iterable[str]) -> list[str]:
        """Undo ``segment``: glue ``@@``-marked fragments back together."""
        out: list[str] = []
        buffer = ""
        for fragment in sentence:
            if fragment.endswith(MARKER):
                buffer += fragment[: -len(MARKER)]
            else:
                out.append(buffer + fragment)
                buffer = ""
        if buffer:
            # Trailing continuation fragment with nothing to attach to.
            out.append(buffer)
        return out

    def transform(self, X: Iterable[Iterable[str]]) -> list[list[str]]:
        return [self.segment(s) for s in X]

    def inverse_transform(self, X: Iterable[Iterable[str]]) -> list[list[str]]:
        return [self.desegment(s) for s in X]

    def to_file(self, path) -> None:
        check_is_fitted(self, "merges_")
        with open(path, "w", encoding="utf-8") as fh:
            for a, b in self.merges_:
                fh.write(f"{a} {b}\n")

    @classmethod
    def from_file(cls, path) -> "BpeSegmenter":
        merges: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                fields = line.split(" ")
                if len(fields) != 2 or not fields[0] or not fields[1]:
                    raise DataFormatError(
                        "expected two space-separated symbols", path=path, line=lineno
                    )
                pair = (fields[0], fields[1])
                if pair in seen:
                    raise DataFormatError(
                        f"duplicate merge pair: {fields[0]} {fields[1]}",
                        path=path,
                        line=lineno,
                    )
                seen.add(pair)
                merges.append(pair)
        model = cls(num_merges=len(merges))
        model.merges_ = merges
        model._reset_cache()
        return model

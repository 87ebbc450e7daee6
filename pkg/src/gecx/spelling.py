"""Noisy-channel spell checking gated by subword segmentation.

A token is considered for correction only when the BPE segmenter breaks
it into several fragments (rare or unseen surface form) and it is absent
from the lexicon.  Candidates within Damerau-Levenshtein distance 2 are
scored by edit cost weighted against a character language model, sentence
context under a word language model, and lexicon frequency.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .errors import DataFormatError
from .validation import check_sentence

MAX_EDIT_DISTANCE = 2
MAX_CANDIDATES = 50


def damerau_levenshtein(a: str, b: str) -> int:
    """Edit distance with adjacent transposition (optimal string alignment)."""
    rows, cols = len(a) + 1, len(b) + 1
    dp = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        dp[i][0] = i
    for j in range(cols):
        dp[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            best = min(
                dp[i - 1][j] + 1,
                dp[i][j - 1] + 1,
                dp[i - 1][j - 1] + cost,
            )
            if (
                i > 1
                and j > 1
                and a[i - 1] == b[j - 2]
                and a[i - 2] == b[j - 1]
                and a[i - 1] != b[j - 1]
            ):
                best = min(best, dp[i - 2][j - 2] + 1)
            dp[i][j] = best
    return dp[-1][-1]


class Lexicon:
    """Known surface forms with frequencies; lookups are case-tolerant."""

    def __init__(self, frequencies: dict[str, int]):
        for word, freq in frequencies.items():
            if freq < 1:
                raise ValueError(f"frequency of {word!r} must be >= 1, got {freq}")
        self._freq = dict(frequencies)
        self._lower = {w.lower() for w in self._freq}

    def __len__(self) -> int:
        return len(self._freq)

    def __contains__(self, token: str) -> bool:
        return token in self._freq or token.lower() in self._lower

    def frequency(self, word: str) -> int:
        return self._freq.get(word, 0)

    def words(self) -> Iterable[str]:
        return self._freq.keys()

    @classmethod
    def from_file(cls, path) -> "Lexicon":
        frequencies: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 2 or not fields[0]:
                    raise DataFormatError(
                        "expected 'word<TAB>count'", path=path, line=lineno
                    )
                try:
                    count = int(fields[1])
                except ValueError:
                    raise DataFormatError(
                        f"bad count {fields[1]!r}", path=path, line=lineno
                    ) from None
                if count < 1:
                    raise DataFormatError(
                        f"count must be >= 1, got {count}", path=path, line=lineno
                    )
                frequencies[fields[0]] = frequencies.get(fields[0], 0) + count
        return cls(frequencies)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for word in sorted(self._freq):
                fh.write(f"{word}\t{self._freq[word]}\n")


def _candidates(token: str, lexicon: Lexicon) -> list[str]:
    """Lexicon words within edit distance 2, most frequent first, capped."""
    lowered = token.lower()
    found: list[tuple[int, str]] = []
    for word in lexicon.words():
        if abs(len(word) - len(token)) > MAX_EDIT_DISTANCE:
            continue
        if damerau_levenshtein(lowered, word.lower()) <= MAX_EDIT_DISTANCE:
            found.append((-lexicon.frequency(word), word))
    found.sort()
    return [word for _, word in found[:MAX_CANDIDATES]]


def spell_correct(
    sentence: Sequence[str],
    lexicon: Lexicon,
    bpe,
    char_lm,
    word_lm,
    lambda_char: float = 1.0,
    lambda_lm: float = 1.0,
    tau: float = 1.0,
) -> list[str]:
    """Correct single-token spelling errors in one sentence.

    Only tokens that both segment into more than one BPE fragment and are
    missing from the lexicon are touched.  A replacement must beat keeping
    the original by the margin ``tau`` in score:

        lambda_char * (char-LM normalized logprob - edit distance)
        + lambda_lm * word-LM sentence logprob + ln(frequency)

    versus ``lambda_lm`` times the sentence logprob of the unchanged
    sentence for the keep option.
    """
    tokens = list(check_sentence(sentence))
    for position, token in enumerate(tokens):
        if token in lexicon:
            continue
        if bpe.fragment_count(token) <= 1:
            continue
        candidates = _candidates(token, lexicon)
        if not candidates:
            continue
        keep_score = lambda_lm * word_lm.logprob(tokens).logprob
        best_word = None
        best_score = -math.inf
        for word in candidates:
            swapped = list(tokens)
            swapped[position] = word
            distance = damerau_levenshtein(token.lower(), word.lower())
            char_term = char_lm.logprob(tuple(word)).normalized - distance
            context_term = word_lm.logprob(swapped).logprob
            score = (
                lambda_char * char_term
                + lambda_lm * context_term
                + math.log(lexicon.frequency(word))
            )
            if score > best_score:
                best_word, best_score = word, score
        if best_word is not None and best_score >= keep_score + tau:
            tokens[position] = best_word
    return tokens

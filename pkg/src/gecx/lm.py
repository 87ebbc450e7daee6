"""Interpolated Kneser-Ney n-gram language models with ARPA export.

Smoothing uses a single fixed discount.  The top order is estimated from
raw counts, intermediate orders from continuation counts, and the unigram
level is maximum likelihood over raw counts with one reserved count for
the unknown word.  Conditional distributions sum to one for every
context, seen or unseen.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import DataFormatError, TrainingDataError
from .tokenization import WordClassMap
from .validation import check_sentence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_LOG10 = math.log(10.0)
_ARPA_SENTINEL = -99.0


@dataclass(frozen=True)
class SentenceScore:
    """Natural-log probability of a sentence plus its end-of-sentence event."""

    logprob: float
    n_scored: int

    def __post_init__(self):
        if self.n_scored < 1:
            raise ValueError("n_scored must be >= 1")
        if self.logprob > 0.0:
            raise ValueError(f"sentence logprob must be <= 0, got {self.logprob}")

    @property
    def normalized(self) -> float:
        return self.logprob / self.n_scored


def project_to_classes(sentence: Iterable[str], classes: WordClassMap) -> list[str]:
    """Map every token to its word class (unknown words to the unknown class)."""
    return [classes[token] for token in check_sentence(sentence)]


class _SentenceScoringMixin:
    """Sentence scoring on top of ``conditional_prob``; needs ``order``."""

    def logprob(self, sentence: Iterable[str]) -> SentenceScore:
        tokens = check_sentence(sentence)
        history = max(self._model_order() - 1, 0)
        context: tuple[str, ...] = (BOS,) * history
        total = 0.0
        for token in tokens + (EOS,):
            total += math.log(self.conditional_prob(token, context))
            if history:
                context = (context + (token,))[-history:]
        return SentenceScore(logprob=min(total, 0.0), n_scored=len(tokens) + 1)

    def perplexity(self, corpus: Iterable[Iterable[str]]) -> float:
        total = 0.0
        n_scored = 0
        for sentence in corpus:
            score = self.logprob(sentence)
            total += score.logprob
            n_scored += score.n_scored
        if n_scored == 0:
            raise TrainingDataError("perplexity of an empty corpus is undefined")
        return math.exp(-total / n_scored)


class NGramLanguageModel(_SentenceScoringMixin, BaseEstimator):
    """Interpolated Kneser-Ney language model with a fixed discount.

    Parameters
    ----------
    order:
        Model order (n).  Contexts are the previous ``order - 1`` tokens,
        padded with ``<s>``; every sentence additionally scores ``</s>``.
    discount:
        Absolute discount in (0, 1) applied at every level above unigram.
    """

    def __init__(self, order: int = 5, discount: float = 0.75):
        self.order = order
        self.discount = discount

    def _model_order(self) -> int:
        return self.order

    def fit(self, X: Iterable[Iterable[str]], y=None):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must be in (0, 1), got {self.discount}")
        n = self.order
        raw: dict[int, Counter] = {k: Counter() for k in range(1, n + 1)}
        n_sentences = 0
        reserved = (BOS, EOS, UNK)
        for sentence in X:
            tokens = check_sentence(sentence)
            for tok in tokens:
                if tok in reserved:
                    raise TrainingDataError(
                        f"reserved token {tok!r} in training data"
                    )
            n_sentences += 1
            padded = (BOS,) * (n - 1) + tokens + (EOS,)
            for i in range(n - 1, len(padded)):
                for k in range(1, n + 1):
                    raw[k][padded[i - k + 1 : i + 1]] += 1
        if n_sentences == 0:
            raise TrainingDataError("lm: no training sentences")

        unigram = Counter({g[0]: c for g, c in raw[1].items()})
        unigram[UNK] += 1
        self.vocabulary_ = frozenset(unigram)
        self._unigram = dict(unigram)
        self._unigram_total = sum(unigram.values())

        # Probability tables per level: raw counts at the top order,
        # continuation counts (distinct left extensions) in between.
        tables: dict[int, dict[tuple, int]] = {}
        if n > 1:
            tables[n] = dict(raw[n])
        for k in range(2, n):
            cont: Counter = Counter()
            for gram in raw[k + 1]:
                cont[gram[1:]] += 1
            tables[k] = dict(cont)

        ctx_totals: dict[int, dict[tuple, int]] = {}
        ctx_types: dict[int, dict[tuple, int]] = {}
        for k, table in tables.items():
            totals: dict[tuple, int] = {}
            types: dict[tuple, int] = {}
            for gram, count in table.items():
                ctx = gram[:-1]
                totals[ctx] = totals.get(ctx, 0) + count
                types[ctx] = types.get(ctx, 0) + 1
            ctx_totals[k] = totals
            ctx_types[k] = types
        self._tables = tables
        self._ctx_totals = ctx_totals
        self._ctx_types = ctx_types
        return self

    def _map_word(self, word: str) -> str:
        return word if word in self.vocabulary_ else UNK

    def _map_context(self, context: Sequence[str]) -> tuple[str, ...]:
        history = self.order - 1
        ctx = tuple(context)[-history:] if history else ()
        return tuple(
            t if (t == BOS or t in self.vocabulary_) else UNK for t in ctx
        )

    def conditional_prob(self, word: str, context: Sequence[str] = ()) -> float:
        """P(word | context) under the interpolated model."""
        check_is_fitted(self, "vocabulary_")
        ctx = self._map_context(context)
        return self._prob(len(ctx) + 1, ctx, self._map_word(word))

    def _prob(self, level: int, ctx: tuple[str, ...], word: str) -> float:
        if level == 1:
            return self._unigram.get(word, self._unigram[UNK]) / self._unigram_total
        total = self._ctx_totals[level].get(ctx, 0)
        if total == 0:
            return self._prob(level - 1, ctx[1:], word)
        count = self._tables[level].get(ctx + (word,), 0)
        types = self._ctx_types[level][ctx]
        discounted = max(count - self.discount, 0.0) / total
        backoff_mass = self.discount * types / total
        return discounted + backoff_mass * self._prob(level - 1, ctx[1:], word)

    # -- ARPA round-trip ---------------------------------------------------

    def _backoff_weight(self, gram: tuple[str, ...]) -> float:
        """Backoff mass left for contexts equal to ``gram`` (1.0 if unseen)."""
        level = len(gram) + 1
        totals = self._ctx_totals.get(level)
        if not totals or gram not in totals:
            return 1.0
        return self.discount * self._ctx_types[level][gram] / totals[gram]

    def save_arpa(self, path) -> None:
        """Write the model in ARPA format (log10 probabilities)."""
        check_is_fitted(self, "vocabulary_")
        n = self.order
        sections: dict[int, list[tuple[tuple[str, ...], float, float | None]]] = {}
        for k in range(1, n + 1):
            entries: dict[tuple[str, ...], float] = {}
            if k == 1:
                for word in self.vocabulary_:
                    entries[(word,)] = self._prob(1, (), word)
            elif k == n:
                for gram in self._tables[n]:
                    entries[gram] = self._prob(n, gram[:-1], gram[-1])
            else:
                for gram in self._tables[k]:
                    entries[gram] = self._prob(k, gram[:-1], gram[-1])
            rows: list[tuple[tuple[str, ...], float, float | None]] = []
            listed = set(entries)
            context_only: set[tuple[str, ...]] = set()
            if k < n:
                context_only = {
                    ctx for ctx in self._ctx_totals[k + 1] if ctx not in listed
                }
            for gram in sorted(listed | context_only):
                prob = entries.get(gram)
                log_p = _ARPA_SENTINEL if prob is None else math.log10(prob)
                bow = None
                if k < n:
                    bow = math.log10(self._backoff_weight(gram))
                rows.append((gram, log_p, bow))
            sections[k] = rows

        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\\data\\\n")
            for k in range(1, n + 1):
                fh.write(f"ngram {k}={len(sections[k])}\n")
            for k in range(1, n + 1):
                fh.write(f"\n\\{k}-grams:\n")
                for gram, log_p, bow in sections[k]:
                    text = " ".join(gram)
                    if bow is None:
                        fh.write(f"{log_p:.7f}\t{text}\n")
                    else:
                        fh.write(f"{log_p:.7f}\t{text}\t{bow:.7f}\n")
            fh.write("\n\\end\\\n")


class ArpaLanguageModel(_SentenceScoringMixin):
    """Backoff scorer over n-gram tables read from an ARPA file."""

    def __init__(self, order: int, tables: dict[int, dict[tuple, tuple[float, float]]]):
        if order < 1 or set(tables) != set(range(1, order + 1)):
            raise ValueError("tables must cover orders 1..n")
        self.order = order
        self._tables = tables
        self.vocabulary_ = frozenset(
            w
            for (w,), (log_p, _) in tables[1].items()
            if w != BOS and log_p > _ARPA_SENTINEL + 1.0
        )
        if UNK not in self.vocabulary_:
            raise DataFormatError("ARPA model lacks a usable <unk> unigram")

    def _model_order(self) -> int:
        return self.order

    def conditional_prob(self, word: str, context: Sequence[str] = ()) -> float:
        history = self.order - 1
        ctx = tuple(context)[-history:] if history else ()
        ctx = tuple(
            t if (t == BOS or (t,) in self._tables[1]) else UNK for t in ctx
        )
        word = word if word in self.vocabulary_ else UNK
        return self._score(ctx, word)

    def _score(self, ctx: tuple[str, ...], word: str) -> float:
        entry = self._tables[len(ctx) + 1].get(ctx + (word,))
        if entry is not None:
            return 10.0 ** entry[0]
        if not ctx:
            return 10.0 ** self._tables[1][(word,)][0]
        ctx_entry = self._tables[len(ctx)].get(ctx)
        bow = 10.0 ** ctx_entry[1] if ctx_entry is not None else 1.0
        return bow * self._score(ctx[1:], word)

    @classmethod
    def from_file(cls, path) -> "ArpaLanguageModel":
        declared: dict[int, int] = {}
        tables: dict[int, dict[tuple, tuple[float, float]]] = {}
        state = "preamble"
        current = 0
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                if line == "\\data\\":
                    state = "counts"
                    continue
                if line == "\\end\\":
                    state = "done"
                    continue
                if line.startswith("\\") and line.endswith("-grams:"):
                    try:
                        current = int(line[1:].split("-")[0])
                    except ValueError:
                        raise DataFormatError(
                            f"bad section header {line!r}", path=path, line=lineno
                        ) from None
                    tables.setdefault(current, {})
                    state = "grams"
                    continue
                if state == "counts":
                    if not line.startswith("ngram "):
                        raise DataFormatError(
                            f"expected 'ngram k=count', got {line!r}",
                            path=path,
                            line=lineno,
                        )
                    k_text, _, count_text = line[len("ngram ") :].partition("=")
                    try:
                        declared[int(k_text)] = int(count_text)
                    except ValueError:
                        raise DataFormatError(
                            f"bad ngram count line {line!r}", path=path, line=lineno
                        ) from None
                    continue
                if state != "grams":
                    raise DataFormatError(
                        f"unexpected line {line!r}", path=path, line=lineno
                    )
                fields = line.split("\t")
                if len(fields) not in (2, 3):
                    raise DataFormatError(
                        "expected 'log10prob<TAB>ngram[<TAB>log10backoff]'",
                        path=path,
                        line=lineno,
                    )
                try:
                    log_p = float(fields[0])
                    bow = float(fields[2]) if len(fields) == 3 else 0.0
                except ValueError:
                    raise DataFormatError(
                        f"bad numeric field in {line!r}", path=path, line=lineno
                    ) from None
                gram = tuple(fields[1].split(" "))
                if len(gram) != current or any(not g for g in gram):
                    raise DataFormatError(
                        f"{len(gram)}-gram in \\{current}-grams section",
                        path=path,
                        line=lineno,
                    )
                tables[current][gram] = (log_p, bow)
        if state != "done":
            raise DataFormatError("missing \\end\\ marker", path=path)
        if not tables:
            raise DataFormatError("no n-gram sections found", path=path)
        order = max(tables)
        for k, expected in declared.items():
            actual = len(tables.get(k, ()))
            if actual != expected:
                raise DataFormatError(
                    f"declared {expected} {k}-grams but found {actual}", path=path
                )
        return cls(order, tables)

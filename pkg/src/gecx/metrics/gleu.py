"""GLEU: n-gram fluency metric aware of the original source sentence.

Hypothesis n-grams that were copied from the source but do not appear in
the reference are penalised; everything else follows corpus BLEU with a
brevity penalty.  Multi-reference corpora are scored by sampling one
reference per sentence over a number of iterations and averaging.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from ..validation import check_same_length, check_sentence


@dataclass(frozen=True)
class GleuConfig:
    max_n: int = 4
    iterations: int = 500
    seed: int = 42

    def __post_init__(self):
        if self.max_n < 1:
            raise ValueError(f"max_n must be >= 1, got {self.max_n}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sentence_stats(
    source: Sequence[str],
    reference: Sequence[str],
    hypothesis: Sequence[str],
    max_n: int = 4,
) -> list[int]:
    """Per-sentence sufficient statistics for corpus GLEU.

    Layout: clipped numerators for n=1..max_n, then the hypothesis n-gram
    totals, then hypothesis and reference lengths.  The numerator for each
    n is matched n-grams minus the count of hypothesis n-grams whose type
    occurs in the source but not in the reference, floored at zero.
    """
    stats: list[int] = []
    totals: list[int] = []
    for n in range(1, max_n + 1):
        hyp_counts = _ngram_counts(hypothesis, n)
        ref_counts = _ngram_counts(reference, n)
        src_counts = _ngram_counts(source, n)
        matched = sum((hyp_counts & ref_counts).values())
        penalty = sum(
            count
            for gram, count in hyp_counts.items()
            if gram in src_counts and gram not in ref_counts
        )
        stats.append(max(matched - penalty, 0))
        totals.append(max(len(hypothesis) - n + 1, 0))
    return stats + totals + [len(hypothesis), len(reference)]


def corpus_score_from_stats(stats: Sequence[float], max_n: int = 4) -> float:
    """Corpus GLEU from summed per-sentence statistics."""
    numerators = stats[:max_n]
    totals = stats[max_n : 2 * max_n]
    hyp_len = stats[2 * max_n]
    ref_len = stats[2 * max_n + 1]
    if hyp_len <= 0:
        return 0.0
    log_sum = 0.0
    for num, total in zip(numerators, totals):
        if num <= 0 or total <= 0:
            return 0.0
        log_sum += math.log(num / total)
    brevity = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    return brevity * math.exp(log_sum / max_n)


def gleu_evaluate(
    sources: Sequence[Sequence[str]],
    references: Sequence[Sequence[Sequence[str]]],
    hypotheses: Sequence[Sequence[str]],
    config: GleuConfig = GleuConfig(),
) -> float:
    """Corpus GLEU, averaged over seeded reference-sampling iterations.

    ``references[i]`` holds one or more reference token sentences for
    sentence ``i``.  With a single reference everywhere the sampling loop
    collapses to one pass.
    """
    check_same_length(
        sources, references, hypotheses, names=("sources", "references", "hypotheses")
    )
    if not sources:
        raise ValueError("cannot score an empty corpus")
    srcs = [check_sentence(s) for s in sources]
    hyps = [check_sentence(h) for h in hypotheses]
    refs: list[list[tuple[str, ...]]] = []
    for i, options in enumerate(references):
        if not options:
            raise ValueError(f"sentence {i} has no reference")
        refs.append([check_sentence(r) for r in options])

    def one_pass(choice: Sequence[int]) -> float:
        width = 2 * config.max_n + 2
        sums = [0] * width
        for i, pick in enumerate(choice):
            for k, v in enumerate(
                sentence_stats(srcs[i], refs[i][pick], hyps[i], config.max_n)
            ):
                sums[k] += v
        return corpus_score_from_stats(sums, config.max_n)

    if all(len(r) == 1 for r in refs):
        return one_pass([0] * len(refs))

    rng = random.Random(config.seed)
    total = 0.0
    for _ in range(config.iterations):
        choice = [rng.randrange(len(r)) for r in refs]
        total += one_pass(choice)
    return total / config.iterations

"""Comparison of system scores against human annotator performance.

Human performance on a multi-annotator gold set is estimated by leaving
one annotator out at a time: that annotator's corrections are scored as
a system against the remaining annotators' edits.
"""

from __future__ import annotations

import statistics
from typing import Sequence

from .m2 import GoldAnnotation, m2_evaluate, reference_hypotheses

# Published human reference points used for ratio reporting.
CONLL10_HUMAN_M2 = 72.15
JFLEG_HUMAN_GLEU = 62.38


def leave_one_out_m2(
    annotations: Sequence[GoldAnnotation],
    max_unchanged: int = 2,
    beta: float = 0.5,
) -> list[float]:
    """Per-annotator M2 scores, each measured against the other annotators."""
    counts = {len(a.edit_sets) for a in annotations}
    if len(counts) != 1:
        raise ValueError("all sentences must have the same number of annotators")
    n_annotators = counts.pop()
    if n_annotators < 2:
        raise ValueError("leave-one-out needs at least two annotators")
    scores = []
    for held_out in range(n_annotators):
        hypotheses = reference_hypotheses(annotations, held_out)
        rest = [
            GoldAnnotation(
                a.source,
                tuple(s for i, s in enumerate(a.edit_sets) if i != held_out),
            )
            for a in annotations
        ]
        report = m2_evaluate(rest, hypotheses, max_unchanged=max_unchanged, beta=beta)
        scores.append(report.f_score)
    return scores


def human_leave_one_out(scores: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation of leave-one-out scores."""
    if len(scores) < 2:
        raise ValueError("need at least two annotator scores")
    return statistics.fmean(scores), statistics.pstdev(scores)


def human_ratio(system_score: float, human_score: float) -> float:
    """System score as a percentage of the human score."""
    if human_score <= 0:
        raise ValueError(f"human score must be positive, got {human_score}")
    return 100.0 * system_score / human_score

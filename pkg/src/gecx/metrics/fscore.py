"""F-measure helpers shared by the evaluation and tuning code."""

from __future__ import annotations


def fbeta(precision: float, recall: float, beta: float = 0.5) -> float:
    """Weighted harmonic mean of precision and recall.

    Returns 0 when both inputs are 0.  Scale-invariant: passing values on
    the percent scale yields the F-measure on the percent scale.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if precision < 0 or recall < 0:
        raise ValueError("precision and recall must be non-negative")
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (1.0 + b2) * precision * recall / denom


def fbeta_counts(tp: float, fp: float, fn: float, beta: float = 0.5) -> float:
    """F-measure directly from edit counts.

    Degenerate cases follow the usual scorer conventions: precision is 1
    when no edits were proposed, recall is 1 when no edits were required.
    """
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return fbeta(precision, recall, beta)

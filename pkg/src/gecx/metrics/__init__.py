"""Evaluation metrics: F-measure, MaxMatch (M2), GLEU, human comparison."""

from .fscore import fbeta, fbeta_counts
from .gleu import GleuConfig, corpus_score_from_stats, gleu_evaluate, sentence_stats
from .human import (
    CONLL10_HUMAN_M2,
    JFLEG_HUMAN_GLEU,
    human_leave_one_out,
    human_ratio,
    leave_one_out_m2,
)
from .m2 import (
    EvalReport,
    GoldAnnotation,
    SentenceOutcome,
    best_sentence_stats,
    m2_evaluate,
    m2_to_string,
    parse_m2,
    reference_hypotheses,
    sentence_credit_options,
    write_m2,
)

__all__ = [
    "CONLL10_HUMAN_M2",
    "EvalReport",
    "GleuConfig",
    "GoldAnnotation",
    "JFLEG_HUMAN_GLEU",
    "SentenceOutcome",
    "best_sentence_stats",
    "corpus_score_from_stats",
    "fbeta",
    "fbeta_counts",
    "gleu_evaluate",
    "human_leave_one_out",
    "human_ratio",
    "leave_one_out_m2",
    "m2_evaluate",
    "m2_to_string",
    "parse_m2",
    "reference_hypotheses",
    "sentence_credit_options",
    "sentence_stats",
    "write_m2",
]

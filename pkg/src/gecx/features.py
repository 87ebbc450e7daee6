"""Edit-based feature extraction for n-best hypotheses."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .alignment import DELETE, INSERT, MATCH, SUBSTITUTE, _runs, align_chars, align_words
from .tokenization import WordClassMap

BOS_CLASS = "<s>"
EOS_CLASS = "</s>"

DENSE_FEATURES = (
    "word_lev_dist",
    "n_sub",
    "n_ins",
    "n_del",
    "n_match",
    "char_dist",
    "char_sub",
    "char_ins",
    "char_del",
)


@dataclass
class FeatureVector:
    """Dense real-valued features plus sparse integer pattern counts."""

    dense: dict[str, float] = field(default_factory=dict)
    sparse: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.dense.items():
            if not math.isfinite(value):
                raise ValueError(f"non-finite dense feature {name}={value!r}")
        for name, count in self.sparse.items():
            if count < 1:
                raise ValueError(f"sparse feature {name} has count {count} < 1")

    def as_dict(self) -> dict[str, float]:
        """Flatten to one name/value mapping (sparse counts become floats)."""
        merged = dict(self.dense)
        for name, count in self.sparse.items():
            if name in merged:
                raise ValueError(f"feature name collision: {name}")
            merged[name] = float(count)
        return merged


def dense_edit_features(src: Sequence[str], hyp: Sequence[str]) -> FeatureVector:
    """Word- and character-level edit statistics between source and hypothesis.

    Character counts are accumulated only over substitute-aligned token
    pairs; insertions and deletions of whole tokens do not contribute.
    """
    ops = align_words(src, hyp)
    n_sub = n_ins = n_del = n_match = 0
    char_dist = char_sub = char_ins = char_del = 0
    for op in ops:
        if op.kind == MATCH:
            n_match += 1
        elif op.kind == SUBSTITUTE:
            n_sub += 1
            dist, counts = align_chars(src[op.src_index], hyp[op.hyp_index])
            char_dist += dist
            char_sub += counts[SUBSTITUTE]
            char_ins += counts[INSERT]
            char_del += counts[DELETE]
        elif op.kind == INSERT:
            n_ins += 1
        else:
            n_del += 1
    dense = {
        "word_lev_dist": float(n_sub + n_ins + n_del),
        "n_sub": float(n_sub),
        "n_ins": float(n_ins),
        "n_del": float(n_del),
        "n_match": float(n_match),
        "char_dist": float(char_dist),
        "char_sub": float(char_sub),
        "char_ins": float(char_ins),
        "char_del": float(char_del),
    }
    return FeatureVector(dense=dense)


def _joined(tokens: Sequence[str]) -> str:
    return "_".join(tokens)


def sparse_pattern_features(
    src: Sequence[str], hyp: Sequence[str], classes: WordClassMap
) -> FeatureVector:
    """Lexicalised edit patterns with word-class context.

    One count per maximal non-match run, e.g. ``sub(eat->eats)|L=C12|R=</s>``
    where L and R are the classes of the neighbouring source tokens
    (sentence boundaries use ``<s>`` and ``</s>``).
    """
    ops = align_words(src, hyp)
    runs, _ = _runs(ops)
    counts: Counter[str] = Counter()
    for run in runs:
        src_part = src[run.src_start : run.src_end]
        hyp_part = hyp[run.hyp_start : run.hyp_end]
        if not src_part:
            op_name = "ins"
        elif not hyp_part:
            op_name = "del"
        else:
            op_name = "sub"
        left = classes[src[run.src_start - 1]] if run.src_start > 0 else BOS_CLASS
        right = classes[src[run.src_end]] if run.src_end < len(src) else EOS_CLASS
        pattern = f"{op_name}({_joined(src_part)}→{_joined(hyp_part)})|L={left}|R={right}"
        counts[pattern] += 1
    return FeatureVector(sparse=dict(counts))

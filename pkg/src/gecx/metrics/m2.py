"""MaxMatch (M2) evaluation against multi-annotator gold edits.

For every sentence the scorer aligns source and hypothesis, enumerates
the edit sets the hypothesis could be credited with (maximal non-match
runs, optionally merged across short matched gaps), and picks the
annotator and edit set that maximise the running corpus F-measure.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..alignment import EditSpan, _Run, _runs, _span_for, align_words, apply_edits
from ..errors import DataFormatError
from ..validation import check_sentence
from .fscore import fbeta_counts

NOOP = "-NONE-"


@dataclass(frozen=True)
class GoldAnnotation:
    """One source sentence with one edit set per annotator."""

    source: tuple[str, ...]
    edit_sets: tuple[tuple[EditSpan, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(
            self, "edit_sets", tuple(tuple(edits) for edits in self.edit_sets)
        )
        if not self.edit_sets:
            raise ValueError("at least one annotator is required")
        for edits in self.edit_sets:
            spans = sorted(edits, key=lambda e: (e.start, e.end))
            for left, right in zip(spans, spans[1:]):
                if right.start < left.end:
                    raise ValueError("overlapping gold edits")
            for span in spans:
                if span.end > len(self.source):
                    raise ValueError("gold edit exceeds sentence length")


@dataclass
class SentenceOutcome:
    """Counts credited to one sentence and the annotator they came from."""

    tp: int
    fp: int
    fn: int
    annotator: int


@dataclass
class EvalReport:
    """Corpus-level edit counts and derived scores."""

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_score: float
    beta: float
    per_sentence: list[SentenceOutcome] = field(default_factory=list)


def _credit_options(
    runs: Sequence[_Run],
    gaps: Sequence[int],
    hyp: Sequence[str],
    gold: Sequence[EditSpan],
    max_unchanged: int,
) -> list[tuple[int, int]]:
    """All achievable (tp, n_edits) pairs over valid run groupings.

    A grouping partitions the run sequence into consecutive groups; a
    group is valid when every bridged match gap inside it is at most
    ``max_unchanged``.  For each tp the minimum edit count is kept.
    """
    gold_set = {e.signature for e in gold}
    # frontier[i]: achievable (tp -> min edits) over the first i runs
    frontier: list[dict[int, int]] = [dict() for _ in range(len(runs) + 1)]
    frontier[0][0] = 0
    for i in range(len(runs)):
        if not frontier[i]:
            continue
        j = i
        while True:
            span = _span_for(runs, i, j, hyp)
            hit = 1 if span.signature in gold_set else 0
            target = frontier[j + 1]
            for tp, edits in frontier[i].items():
                new_tp, new_edits = tp + hit, edits + 1
                if target.get(new_tp, new_edits + 1) > new_edits:
                    target[new_tp] = new_edits
            if j + 1 < len(runs) and gaps[j] <= max_unchanged:
                j += 1
            else:
                break
    return sorted(frontier[len(runs)].items())


def sentence_credit_options(
    source: Sequence[str],
    hypothesis: Sequence[str],
    gold: Sequence[EditSpan],
    max_unchanged: int = 2,
) -> list[tuple[int, int, int]]:
    """Achievable (tp, fp, fn) triples for one sentence and annotator."""
    src = check_sentence(source)
    hyp = check_sentence(hypothesis)
    runs, gaps = _runs(align_words(src, hyp))
    return [
        (tp, edits - tp, len(gold) - tp)
        for tp, edits in _credit_options(runs, gaps, hyp, gold, max_unchanged)
    ]


def _pick(
    options: Iterable[tuple[int, int, int, int]],
    base: tuple[int, int, int],
    beta: float,
) -> tuple[float, SentenceOutcome]:
    """Choose the (tp, fp, fn, annotator) option maximising the running F.

    Ties prefer more true positives, then fewer false positives, then
    fewer false negatives, then the lower annotator index.
    """
    best_key = None
    best = None
    for tp, fp, fn, annotator in options:
        f = fbeta_counts(base[0] + tp, base[1] + fp, base[2] + fn, beta)
        key = (f, tp, -fp, -fn, -annotator)
        if best_key is None or key > best_key:
            best_key = key
            best = SentenceOutcome(tp=tp, fp=fp, fn=fn, annotator=annotator)
    return best_key[0], best


def m2_evaluate(
    gold: Sequence[GoldAnnotation],
    hypotheses: Sequence[Sequence[str]],
    max_unchanged: int = 2,
    beta: float = 0.5,
) -> EvalReport:
    """Score a hypothesis corpus against multi-annotator gold edits.

    Matching is case-sensitive and exact on (start, end, correction).
    Sentences are folded greedily: each picks the annotator and credit
    option that maximise the corpus F over the counts accumulated so far.
    """
    if len(gold) != len(hypotheses):
        raise ValueError(
            f"gold has {len(gold)} sentences but hypotheses has {len(hypotheses)}"
        )
    if max_unchanged < 0:
        raise ValueError(f"max_unchanged must be >= 0, got {max_unchanged}")
    running = (0, 0, 0)
    outcomes: list[SentenceOutcome] = []
    for annotation, hypothesis in zip(gold, hypotheses):
        hyp = check_sentence(hypothesis)
        runs, gaps = _runs(align_words(annotation.source, hyp))
        options: list[tuple[int, int, int, int]] = []
        for annotator, edits in enumerate(annotation.edit_sets):
            for tp, n_edits in _credit_options(runs, gaps, hyp, edits, max_unchanged):
                options.append((tp, n_edits - tp, len(edits) - tp, annotator))
        _, outcome = _pick(options, running, beta)
        outcomes.append(outcome)
        running = (
            running[0] + outcome.tp,
            running[1] + outcome.fp,
            running[2] + outcome.fn,
        )
    tp, fp, fn = running
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return EvalReport(
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        f_score=fbeta_counts(tp, fp, fn, beta),
        beta=beta,
        per_sentence=outcomes,
    )


def best_sentence_stats(
    annotation: GoldAnnotation,
    hypothesis: Sequence[str],
    max_unchanged: int = 2,
    beta: float = 0.5,
) -> tuple[int, int, int]:
    """Sentence-local best (tp, fp, fn) across annotators and credit options.

    Unlike :func:`m2_evaluate` this ignores corpus history, which makes
    the stats usable as decomposable sufficient statistics for tuning.
    """
    hyp = check_sentence(hypothesis)
    runs, gaps = _runs(align_words(annotation.source, hyp))
    options = []
    for annotator, edits in enumerate(annotation.edit_sets):
        for tp, n_edits in _credit_options(runs, gaps, hyp, edits, max_unchanged):
            options.append((tp, n_edits - tp, len(edits) - tp, annotator))
    _, outcome = _pick(options, (0, 0, 0), beta)
    return (outcome.tp, outcome.fp, outcome.fn)


# -- gold file round-trip ----------------------------------------------------


def parse_m2(source) -> list[GoldAnnotation]:
    """Parse gold annotations from a path, file object, or line iterable."""
    if hasattr(source, "read"):
        return _parse_m2_lines(source, path=getattr(source, "name", "<m2>"))
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return _parse_m2_lines(fh, path=source)
    return _parse_m2_lines(source, path="<m2>")


def _parse_m2_lines(lines: Iterable[str], path) -> list[GoldAnnotation]:
    annotations: list[GoldAnnotation] = []
    source_tokens: tuple[str, ...] | None = None
    edits_by_annotator: dict[int, list[EditSpan]] = {}
    start_line = 0

    def flush(lineno):
        nonlocal source_tokens, edits_by_annotator
        if source_tokens is None:
            if edits_by_annotator:
                raise DataFormatError("A line before S line", path=path, line=lineno)
            return
        ids = sorted(edits_by_annotator) or [0]
        sets = tuple(tuple(edits_by_annotator.get(a, ())) for a in ids)
        try:
            annotations.append(GoldAnnotation(source_tokens, sets))
        except ValueError as exc:
            raise DataFormatError(str(exc), path=path, line=start_line) from None
        source_tokens = None
        edits_by_annotator = {}

    lineno = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("S ") or line == "S":
            if source_tokens is not None:
                raise DataFormatError(
                    "second S line in one block", path=path, line=lineno
                )
            source_tokens = tuple(line[2:].split())
            start_line = lineno
            continue
        if not line.startswith("A "):
            raise DataFormatError(
                f"expected S or A line, got {line!r}", path=path, line=lineno
            )
        if source_tokens is None:
            raise DataFormatError("A line before S line", path=path, line=lineno)
        fields = line[2:].split("|||")
        if len(fields) != 6:
            raise DataFormatError(
                f"A line needs 6 |||-separated fields, got {len(fields)}",
                path=path,
                line=lineno,
            )
        span_text, type_label, correction_text = fields[0], fields[1], fields[2]
        try:
            annotator = int(fields[5])
        except ValueError:
            raise DataFormatError(
                f"annotator id is not an integer: {fields[5]!r}",
                path=path,
                line=lineno,
            ) from None
        parts = span_text.split()
        if len(parts) != 2:
            raise DataFormatError(
                f"bad span field {span_text!r}", path=path, line=lineno
            )
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataFormatError(
                f"bad span field {span_text!r}", path=path, line=lineno
            ) from None
        if (start, end) == (-1, -1) and type_label in (NOOP, "noop"):
            edits_by_annotator.setdefault(annotator, [])
            continue
        correction = () if correction_text == NOOP else tuple(correction_text.split())
        try:
            span = EditSpan(start, end, correction, type_label=type_label)
        except ValueError as exc:
            raise DataFormatError(str(exc), path=path, line=lineno) from None
        edits_by_annotator.setdefault(annotator, []).append(span)
    flush(lineno + 1)
    return annotations


def write_m2(annotations: Sequence[GoldAnnotation], path) -> None:
    """Write gold annotations in M2 format (inverse of :func:`parse_m2`)."""
    if hasattr(path, "write"):
        _write_m2_lines(annotations, path)
        return
    with open(path, "w", encoding="utf-8") as fh:
        _write_m2_lines(annotations, fh)


def _write_m2_lines(annotations: Sequence[GoldAnnotation], fh) -> None:
    for annotation in annotations:
        fh.write("S " + " ".join(annotation.source) + "\n")
        for annotator, edits in enumerate(annotation.edit_sets):
            if not edits:
                fh.write(f"A -1 -1|||noop|||{NOOP}|||REQUIRED|||-NONE-|||{annotator}\n")
                continue
            for edit in sorted(edits, key=lambda e: (e.start, e.end)):
                label = edit.type_label if edit.type_label else "UNK"
                correction = " ".join(edit.correction)
                fh.write(
                    f"A {edit.start} {edit.end}|||{label}|||{correction}|||"
                    f"REQUIRED|||-NONE-|||{annotator}\n"
                )
        fh.write("\n")


def m2_to_string(annotations: Sequence[GoldAnnotation]) -> str:
    buf = io.StringIO()
    _write_m2_lines(annotations, buf)
    return buf.getvalue()


def reference_hypotheses(
    annotations: Sequence[GoldAnnotation], annotator: int
) -> list[list[str]]:
    """Corpus produced by applying one annotator's edits to every source."""
    corpus = []
    for annotation in annotations:
        if annotator >= len(annotation.edit_sets):
            raise ValueError(
                f"annotator {annotator} missing (sentence has "
                f"{len(annotation.edit_sets)} annotators)"
            )
        corpus.append(apply_edits(annotation.source, annotation.edit_sets[annotator]))
    return corpus

"""Levenshtein alignment and edit-span extraction.

The same dynamic program aligns word sequences and character sequences.
Backtraces prefer match over substitute over delete over insert, which
makes every downstream op sequence, span, and feature deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"


@dataclass(frozen=True)
class AlignmentOp:
    """One alignment operation between a source and hypothesis position."""

    kind: str
    src_index: int | None = None
    hyp_index: int | None = None

    def __post_init__(self):
        if self.kind in (MATCH, SUBSTITUTE):
            ok = self.src_index is not None and self.hyp_index is not None
        elif self.kind == DELETE:
            ok = self.src_index is not None and self.hyp_index is None
        elif self.kind == INSERT:
            ok = self.src_index is None and self.hyp_index is not None
        else:
            raise ValueError(f"unknown op kind: {self.kind!r}")
        if not ok:
            raise ValueError(f"inconsistent indices for {self.kind} op")


def _distance_table(src: Sequence, hyp: Sequence) -> list[list[int]]:
    rows, cols = len(src) + 1, len(hyp) + 1
    dp = [[0] * cols for _ in range(rows)]
    for i in range(1, rows):
        dp[i][0] = i
    for j in range(1, cols):
        dp[0][j] = j
    for i in range(1, rows):
        row, above = dp[i], dp[i - 1]
        s = src[i - 1]
        for j in range(1, cols):
            cost = 0 if s == hyp[j - 1] else 1
            row[j] = min(above[j - 1] + cost, above[j] + 1, row[j - 1] + 1)
    return dp


def _backtrace(dp, src, hyp) -> list[AlignmentOp]:
    ops: list[AlignmentOp] = []
    i, j = len(src), len(hyp)
    while i > 0 or j > 0:
        here = dp[i][j]
        if i > 0 and j > 0 and src[i - 1] == hyp[j - 1] and dp[i - 1][j - 1] == here:
            ops.append(AlignmentOp(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dp[i - 1][j - 1] + 1 == here:
            ops.append(AlignmentOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dp[i - 1][j] + 1 == here:
            ops.append(AlignmentOp(DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(AlignmentOp(INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return ops


def align_words(src: Sequence[str], hyp: Sequence[str]) -> list[AlignmentOp]:
    """Minimum-edit alignment of two token sequences."""
    return _backtrace(_distance_table(src, hyp), src, hyp)


def levenshtein(src: Sequence, hyp: Sequence) -> int:
    """Plain Levenshtein distance (unit costs, no transposition)."""
    return _distance_table(src, hyp)[len(src)][len(hyp)]


def align_chars(src: str, hyp: str) -> tuple[int, dict[str, int]]:
    """Character-level distance and per-op counts between two strings."""
    ops = _backtrace(_distance_table(src, hyp), src, hyp)
    counts = {MATCH: 0, SUBSTITUTE: 0, INSERT: 0, DELETE: 0}
    for op in ops:
        counts[op.kind] += 1
    distance = counts[SUBSTITUTE] + counts[INSERT] + counts[DELETE]
    return distance, counts


@dataclass(frozen=True)
class EditSpan:
    """A contiguous rewrite of source positions [start, end) into ``correction``."""

    start: int
    end: int
    correction: tuple[str, ...]
    type_label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"bad span [{self.start}, {self.end})")
        if self.start == self.end and not self.correction:
            raise ValueError("insertion span must carry a non-empty correction")
        object.__setattr__(self, "correction", tuple(self.correction))

    @property
    def signature(self) -> tuple[int, int, tuple[str, ...]]:
        return (self.start, self.end, self.correction)


@dataclass(frozen=True)
class _Run:
    """A maximal run of non-match ops, as half-open src and hyp ranges."""

    src_start: int
    src_end: int
    hyp_start: int
    hyp_end: int


def _runs(ops: Sequence[AlignmentOp]) -> tuple[list[_Run], list[int]]:
    """Maximal non-match runs plus the match-gap length between neighbours."""
    runs: list[_Run] = []
    gaps: list[int] = []
    src_pos = hyp_pos = 0
    current: list[int] | None = None  # [src_start, hyp_start]
    pending_gap = 0
    for op in ops:
        if op.kind == MATCH:
            if current is not None:
                runs.append(_Run(current[0], src_pos, current[1], hyp_pos))
                current = None
                pending_gap = 0
            pending_gap += 1
            src_pos += 1
            hyp_pos += 1
            continue
        if current is None:
            if runs:
                gaps.append(pending_gap)
            current = [src_pos, hyp_pos]
        if op.kind in (SUBSTITUTE, DELETE):
            src_pos += 1
        if op.kind in (SUBSTITUTE, INSERT):
            hyp_pos += 1
    if current is not None:
        runs.append(_Run(current[0], src_pos, current[1], hyp_pos))
    return runs, gaps


def _span_for(runs: Sequence[_Run], i: int, j: int, hyp: Sequence[str]) -> EditSpan:
    """Edit span covering runs i..j inclusive; bridged matches come from hyp."""
    return EditSpan(
        runs[i].src_start,
        runs[j].src_end,
        tuple(hyp[runs[i].hyp_start : runs[j].hyp_end]),
    )


def extract_edits(
    ops: Sequence[AlignmentOp],
    src: Sequence[str],
    hyp: Sequence[str],
    max_unchanged: int = 0,
) -> list[EditSpan]:
    """Edit spans implied by an alignment.

    Every maximal run of non-match ops becomes a span.  When
    ``max_unchanged`` > 0, additional candidate spans merge neighbouring
    runs across gaps of at most ``max_unchanged`` matched tokens; the
    bridged matches are carried inside the correction.
    """
    if max_unchanged < 0:
        raise ValueError(f"max_unchanged must be >= 0, got {max_unchanged}")
    runs, gaps = _runs(ops)
    spans: list[EditSpan] = []
    for i in range(len(runs)):
        spans.append(_span_for(runs, i, i, hyp))
        j = i
        while j + 1 < len(runs) and gaps[j] <= max_unchanged:
            j += 1
            spans.append(_span_for(runs, i, j, hyp))
    spans.sort(key=lambda e: (e.start, e.end, e.correction))
    return spans


def apply_edits(src: Sequence[str], edits: Iterable[EditSpan]) -> list[str]:
    """Apply non-overlapping edit spans to a source sentence."""
    ordered = sorted(edits, key=lambda e: (e.start, e.end))
    for left, right in zip(ordered, ordered[1:]):
        if right.start < left.end:
            raise ValueError(
                f"overlapping edits: [{left.start},{left.end}) and "
                f"[{right.start},{right.end})"
            )
    out: list[str] = []
    cursor = 0
    for edit in ordered:
        if edit.end > len(src):
            raise ValueError(f"edit [{edit.start},{edit.end}) exceeds sentence length")
        out.extend(src[cursor : edit.start])
        out.extend(edit.correction)
        cursor = edit.end
    out.extend(src[cursor:])
    return out

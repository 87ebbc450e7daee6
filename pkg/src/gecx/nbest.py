"""N-best lists: wire format, feature annotation, and linear rescoring.

The on-disk format is one hypothesis per line::

    <id> ||| <tokens> ||| <Name>= <v> [<v> ...] ... ||| <total>

A feature name followed by several values expands to indexed names
(``Ops= 1 0 2`` becomes ``Ops0``, ``Ops1``, ``Ops2``).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DataFormatError
from .features import dense_edit_features, sparse_pattern_features
from .tokenization import WordClassMap
from .validation import check_sentence

SEPARATOR = " ||| "


@dataclass
class Hypothesis:
    """One candidate correction with its features and model score."""

    tokens: tuple[str, ...]
    features: dict[str, float] = field(default_factory=dict)
    model_score: float = 0.0

    def __post_init__(self):
        self.tokens = tuple(self.tokens)
        for name, value in self.features.items():
            if not name or any(ch.isspace() for ch in name):
                raise ValueError(f"bad feature name: {name!r}")
            if not math.isfinite(value):
                raise ValueError(f"non-finite feature {name}={value!r}")
        if not math.isfinite(self.model_score):
            raise ValueError(f"non-finite model score: {self.model_score!r}")


@dataclass
class NBestList:
    """Hypotheses for one sentence, best (highest model score) first."""

    sentence_id: int
    hypotheses: list[Hypothesis]

    def __post_init__(self):
        if self.sentence_id < 0:
            raise ValueError(f"sentence id must be >= 0, got {self.sentence_id}")
        if not self.hypotheses:
            raise ValueError(f"sentence {self.sentence_id}: empty n-best list")
        self.hypotheses = sorted(
            self.hypotheses, key=lambda h: -h.model_score
        )

    @property
    def best(self) -> Hypothesis:
        return self.hypotheses[0]


@dataclass
class LinearModel:
    """A named weight vector; scores are plain dot products."""

    weights: dict[str, float]

    def __post_init__(self):
        for name, value in self.weights.items():
            if not math.isfinite(value):
                raise ValueError(f"non-finite weight {name}={value!r}")

    def score(self, features: dict[str, float]) -> float:
        return sum(w * features.get(name, 0.0) for name, w in self.weights.items())

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name in sorted(self.weights):
                fh.write(f"{name}\t{self.weights[name]!r}\n")

    @classmethod
    def from_file(cls, path) -> "LinearModel":
        weights: dict[str, float] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 2 or not fields[0]:
                    raise DataFormatError(
                        "expected 'name<TAB>weight'", path=path, line=lineno
                    )
                try:
                    weights[fields[0]] = float(fields[1])
                except ValueError:
                    raise DataFormatError(
                        f"bad weight {fields[1]!r}", path=path, line=lineno
                    ) from None
        return cls(weights)


def _parse_feature_field(text: str, path, lineno: int) -> dict[str, float]:
    features: dict[str, float] = {}
    name: str | None = None
    values: list[float] = []

    def flush():
        if name is None:
            return
        if not values:
            raise DataFormatError(
                f"feature {name!r} has no values", path=path, line=lineno
            )
        if len(values) == 1:
            expanded = {name: values[0]}
        else:
            expanded = {f"{name}{i}": v for i, v in enumerate(values)}
        for key, value in expanded.items():
            if key in features:
                raise DataFormatError(
                    f"duplicate feature name {key!r}", path=path, line=lineno
                )
            features[key] = value

    for token in text.split():
        if token.endswith("="):
            flush()
            name = token[:-1]
            if not name:
                raise DataFormatError("empty feature name", path=path, line=lineno)
            values = []
        else:
            if name is None:
                raise DataFormatError(
                    f"feature value {token!r} before any name", path=path, line=lineno
                )
            try:
                values.append(float(token))
            except ValueError:
                raise DataFormatError(
                    f"bad feature value {token!r}", path=path, line=lineno
                ) from None
    flush()
    return features


def parse_nbest(source) -> list[NBestList]:
    """Parse n-best lists from a path, file object, or line iterable."""
    if hasattr(source, "read"):
        return _parse_nbest_lines(source, path=getattr(source, "name", "<nbest>"))
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return _parse_nbest_lines(fh, path=source)
    return _parse_nbest_lines(source, path="<nbest>")


def _parse_nbest_lines(lines: Iterable[str], path) -> list[NBestList]:
    lists: list[NBestList] = []
    current_id: int | None = None
    current: list[Hypothesis] = []

    def flush():
        if current_id is not None:
            lists.append(NBestList(current_id, list(current)))

    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split(SEPARATOR)
        if len(fields) != 4:
            raise DataFormatError(
                f"expected 4 '|||'-separated fields, got {len(fields)}",
                path=path,
                line=lineno,
            )
        try:
            sentence_id = int(fields[0].strip())
        except ValueError:
            raise DataFormatError(
                f"bad sentence id {fields[0]!r}", path=path, line=lineno
            ) from None
        if current_id is not None and sentence_id < current_id:
            raise DataFormatError(
                f"sentence id {sentence_id} after {current_id} (ids must be "
                "non-decreasing)",
                path=path,
                line=lineno,
            )
        tokens = tuple(fields[1].split())
        features = _parse_feature_field(fields[2], path, lineno)
        try:
            total = float(fields[3].strip())
        except ValueError:
            raise DataFormatError(
                f"bad total score {fields[3]!r}", path=path, line=lineno
            ) from None
        if sentence_id != current_id:
            flush()
            current_id = sentence_id
            current = []
        try:
            current.append(Hypothesis(tokens, features, total))
        except ValueError as exc:
            raise DataFormatError(str(exc), path=path, line=lineno) from None
    flush()
    return lists


def write_nbest(lists: Sequence[NBestList], path) -> None:
    """Write n-best lists in the wire format (inverse of :func:`parse_nbest`)."""
    with open(path, "w", encoding="utf-8") as fh:
        for nbest in lists:
            for hyp in nbest.hypotheses:
                parts = " ".join(
                    f"{name}= {hyp.features[name]!r}" for name in sorted(hyp.features)
                )
                fh.write(
                    f"{nbest.sentence_id}{SEPARATOR}{' '.join(hyp.tokens)}"
                    f"{SEPARATOR}{parts}{SEPARATOR}{hyp.model_score!r}\n"
                )


def linear_rescore(nbest: NBestList, model: LinearModel) -> Hypothesis:
    """Best hypothesis under the model; ties keep the lowest original rank."""
    best = None
    best_score = -math.inf
    for hyp in nbest.hypotheses:
        score = model.score(hyp.features)
        if best is None or score > best_score:
            best = hyp
            best_score = score
    return best


def rescore_nbest(nbest: NBestList, model: LinearModel) -> NBestList:
    """Re-rank an n-best list, replacing model scores with linear scores."""
    scored = [
        Hypothesis(h.tokens, dict(h.features), model.score(h.features))
        for h in nbest.hypotheses
    ]
    # NBestList sorting is stable, so equal scores keep their original order.
    return NBestList(nbest.sentence_id, scored)


# -- feature annotators ------------------------------------------------------


class LmScoreAnnotator:
    """Adds a language-model score as a negative natural-log feature."""

    def __init__(self, name: str, model, normalized: bool = False):
        self.name = name
        self.model = model
        self.normalized = normalized

    def annotate(self, source: Sequence[str], hypothesis: Sequence[str]) -> dict:
        score = self.model.logprob(hypothesis)
        value = score.normalized if self.normalized else score.logprob
        return {self.name: -value}


class ClassLmScoreAnnotator:
    """LM score over the hypothesis projected to word classes."""

    def __init__(self, name: str, model, classes: WordClassMap, normalized: bool = False):
        self.name = name
        self.model = model
        self.classes = classes
        self.normalized = normalized

    def annotate(self, source: Sequence[str], hypothesis: Sequence[str]) -> dict:
        projected = [self.classes[token] for token in hypothesis]
        score = self.model.logprob(projected)
        value = score.normalized if self.normalized else score.logprob
        return {self.name: -value}


class DenseEditAnnotator:
    """Adds the canonical dense edit features against the source."""

    def annotate(self, source: Sequence[str], hypothesis: Sequence[str]) -> dict:
        return dense_edit_features(source, hypothesis).as_dict()


class SparsePatternAnnotator:
    """Adds class-contexted edit pattern counts against the source."""

    def __init__(self, classes: WordClassMap):
        self.classes = classes

    def annotate(self, source: Sequence[str], hypothesis: Sequence[str]) -> dict:
        return sparse_pattern_features(source, hypothesis, self.classes).as_dict()


def annotate_features(
    nbests: Sequence[NBestList],
    sources: Sequence[Sequence[str]],
    annotators: Sequence,
) -> list[NBestList]:
    """Return new n-best lists with annotator features merged in.

    Every list's sentence id indexes into ``sources``.  A feature name
    produced by an annotator that already exists on a hypothesis is an
    error rather than a silent overwrite.
    """
    out: list[NBestList] = []
    for nbest in nbests:
        if nbest.sentence_id >= len(sources):
            raise DataFormatError(
                f"sentence id {nbest.sentence_id} has no source "
                f"(corpus has {len(sources)} sentences)"
            )
        source = check_sentence(sources[nbest.sentence_id])
        hyps = []
        for hyp in nbest.hypotheses:
            features = dict(hyp.features)
            for annotator in annotators:
                for name, value in annotator.annotate(source, hyp.tokens).items():
                    if name in features:
                        raise DataFormatError(
                            f"sentence {nbest.sentence_id}: feature name "
                            f"collision {name!r}"
                        )
                    features[name] = value
            hyps.append(Hypothesis(hyp.tokens, features, hyp.model_score))
        out.append(NBestList(nbest.sentence_id, hyps))
    return out

"""Multi-stage correction pipelines combining decoders, rescoring, and
spell checking.

A pipeline is a list of stages applied in order to per-sentence n-best
state.  ``corrector`` stages replace the state from a precomputed n-best
file or a rule table, ``rescore`` stages annotate features and re-rank,
and ``spellcheck`` stages rewrite the current best hypothesis.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .bpe import BpeSegmenter
from .errors import DataFormatError, PipelineStageError
from .lm import ArpaLanguageModel
from .nbest import (
    ClassLmScoreAnnotator,
    DenseEditAnnotator,
    Hypothesis,
    LinearModel,
    LmScoreAnnotator,
    NBestList,
    SparsePatternAnnotator,
    annotate_features,
    parse_nbest,
    rescore_nbest,
)
from .spelling import Lexicon, spell_correct
from .tokenization import load_word_classes
from .validation import check_sentence


class FileCorrector:
    """Replays a precomputed decode: sentence id -> stored n-best list."""

    def __init__(self, nbests: Sequence[NBestList]):
        self._by_id = {nb.sentence_id: nb for nb in nbests}

    @classmethod
    def from_file(cls, path) -> "FileCorrector":
        return cls(parse_nbest(path))

    def __call__(self, tokens: Sequence[str], sentence_id: int) -> NBestList:
        nbest = self._by_id.get(sentence_id)
        if nbest is None:
            raise DataFormatError(f"no n-best entry for sentence id {sentence_id}")
        return nbest


class RuleCorrector:
    """Applies token-sequence rewrite rules, leftmost match first.

    At each position the longest matching pattern wins; matches never
    overlap.  Produces a single-hypothesis n-best list.
    """

    def __init__(self, rules: Sequence[tuple[Sequence[str], Sequence[str]]]):
        table: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
        for pattern, replacement in rules:
            pattern = tuple(pattern)
            if not pattern:
                raise ValueError("rule pattern must be non-empty")
            table.append((pattern, tuple(replacement)))
        # Longest pattern first so the scan below is leftmost-longest.
        self._rules = sorted(table, key=lambda r: -len(r[0]))

    @classmethod
    def from_file(cls, path) -> "RuleCorrector":
        rules = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip():
                    continue
                sides = line.split("|||")
                if len(sides) != 2:
                    raise DataFormatError(
                        "expected 'pattern ||| replacement'", path=path, line=lineno
                    )
                pattern = tuple(sides[0].split())
                replacement = tuple(sides[1].split())
                if not pattern:
                    raise DataFormatError(
                        "empty rule pattern", path=path, line=lineno
                    )
                rules.append((pattern, replacement))
        return cls(rules)

    def rewrite(self, tokens: Sequence[str]) -> list[str]:
        toks = tuple(tokens)
        out: list[str] = []
        i = 0
        while i < len(toks):
            applied = False
            for pattern, replacement in self._rules:
                if toks[i : i + len(pattern)] == pattern:
                    out.extend(replacement)
                    i += len(pattern)
                    applied = True
                    break
            if not applied:
                out.append(toks[i])
                i += 1
        return out

    def __call__(self, tokens: Sequence[str], sentence_id: int) -> NBestList:
        return NBestList(sentence_id, [Hypothesis(tuple(self.rewrite(tokens)))])


@dataclass
class CorrectorStage:
    corrector: Callable[[Sequence[str], int], NBestList]
    kind: str = field(default="corrector", init=False)

    def apply(self, state, sources):
        return [self.corrector(nb.best.tokens, nb.sentence_id) for nb in state]


@dataclass
class RescoreStage:
    model: LinearModel
    annotators: Sequence = ()
    kind: str = field(default="rescore", init=False)

    def apply(self, state, sources):
        if self.annotators:
            state = annotate_features(state, sources, self.annotators)
        return [rescore_nbest(nb, self.model) for nb in state]


@dataclass
class SpellcheckStage:
    lexicon: Lexicon
    bpe: BpeSegmenter
    char_lm: object
    word_lm: object
    lambda_char: float = 1.0
    lambda_lm: float = 1.0
    tau: float = 1.0
    kind: str = field(default="spellcheck", init=False)

    def apply(self, state, sources):
        out = []
        for nb in state:
            corrected = spell_correct(
                nb.best.tokens,
                self.lexicon,
                self.bpe,
                self.char_lm,
                self.word_lm,
                lambda_char=self.lambda_char,
                lambda_lm=self.lambda_lm,
                tau=self.tau,
            )
            out.append(NBestList(nb.sentence_id, [Hypothesis(tuple(corrected))]))
        return out


@dataclass
class StageTrace:
    stage_index: int
    kind: str
    outputs: list[list[str]]


@dataclass
class PipelineResult:
    corrected: list[list[str]]
    traces: list[StageTrace]


def pipeline_run(stages: Sequence, corpus: Sequence[Sequence[str]]) -> PipelineResult:
    """Run stages in order over a source corpus.

    The per-sentence state starts as a singleton n-best list holding the
    source itself.  A failure inside stage ``i`` aborts the run with a
    :class:`PipelineStageError` carrying ``i``.
    """
    if not stages:
        raise ValueError("pipeline needs at least one stage")
    sources = [check_sentence(s) for s in corpus]
    state = [NBestList(i, [Hypothesis(tokens)]) for i, tokens in enumerate(sources)]
    traces: list[StageTrace] = []
    for index, stage in enumerate(stages):
        try:
            state = stage.apply(state, sources)
        except Exception as exc:
            raise PipelineStageError(index, getattr(stage, "kind", "?"), exc) from exc
        traces.append(
            StageTrace(index, stage.kind, [list(nb.best.tokens) for nb in state])
        )
    return PipelineResult([list(nb.best.tokens) for nb in state], traces)


def combine_ensemble_scores(
    nbest: NBestList,
    columns: dict[str, Sequence[float]],
    weights: dict[str, float],
) -> NBestList:
    """Attach an ``ens`` feature: the weighted sum of external score columns.

    Every weighted column must cover every hypothesis; partial coverage is
    an error.
    """
    for name in weights:
        if name not in columns:
            raise DataFormatError(f"no score column named {name!r}")
        if len(columns[name]) != len(nbest.hypotheses):
            raise DataFormatError(
                f"column {name!r} has {len(columns[name])} scores for "
                f"{len(nbest.hypotheses)} hypotheses"
            )
    hyps = []
    for i, hyp in enumerate(nbest.hypotheses):
        if "ens" in hyp.features:
            raise DataFormatError("hypothesis already has an 'ens' feature")
        value = sum(w * columns[name][i] for name, w in weights.items())
        features = dict(hyp.features)
        features["ens"] = value
        hyps.append(Hypothesis(hyp.tokens, features, hyp.model_score))
    return NBestList(nbest.sentence_id, hyps)


# -- configuration -----------------------------------------------------------

_STAGE_KEYS = {
    "corrector": {"kind", "nbest_path", "rules_path"},
    "rescore": {"kind", "weights_path", "annotators"},
    "spellcheck": {
        "kind",
        "lexicon_path",
        "bpe_path",
        "char_lm_path",
        "word_lm_path",
        "lambda_char",
        "lambda_lm",
        "tau",
    },
}

_ANNOTATOR_KEYS = {
    "lm": {"kind", "name", "model_path", "normalized"},
    "class_lm": {"kind", "name", "model_path", "classes_path", "normalized"},
    "dense_edits": {"kind"},
    "sparse_patterns": {"kind", "classes_path"},
}


def _resolve(base_dir: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def build_annotators(specs: Sequence[dict], base_dir: str = ".") -> list:
    """Construct feature annotators from configuration dictionaries."""
    annotators = []
    for i, spec in enumerate(specs):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise DataFormatError(f"annotator {i}: expected an object with 'kind'")
        kind = spec["kind"]
        allowed = _ANNOTATOR_KEYS.get(kind)
        if allowed is None:
            raise DataFormatError(f"annotator {i}: unknown kind {kind!r}")
        extra = set(spec) - allowed
        if extra:
            raise DataFormatError(
                f"annotator {i}: unknown keys {sorted(extra)} for kind {kind!r}"
            )
        if kind == "lm":
            model = ArpaLanguageModel.from_file(_resolve(base_dir, spec["model_path"]))
            annotators.append(
                LmScoreAnnotator(
                    spec["name"], model, normalized=bool(spec.get("normalized", False))
                )
            )
        elif kind == "class_lm":
            model = ArpaLanguageModel.from_file(_resolve(base_dir, spec["model_path"]))
            classes = load_word_classes(_resolve(base_dir, spec["classes_path"]))
            annotators.append(
                ClassLmScoreAnnotator(
                    spec["name"],
                    model,
                    classes,
                    normalized=bool(spec.get("normalized", False)),
                )
            )
        elif kind == "dense_edits":
            annotators.append(DenseEditAnnotator())
        else:
            classes = load_word_classes(_resolve(base_dir, spec["classes_path"]))
            annotators.append(SparsePatternAnnotator(classes))
    return annotators


def build_pipeline(config: dict, base_dir: str = ".") -> list:
    """Turn a parsed configuration object into stage instances."""
    if not isinstance(config, dict) or "stages" not in config:
        raise DataFormatError("pipeline config must be an object with 'stages'")
    specs = config["stages"]
    if not isinstance(specs, list) or not specs:
        raise DataFormatError("'stages' must be a non-empty array")
    stages = []
    for i, spec in enumerate(specs):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise DataFormatError(f"stage {i}: expected an object with 'kind'")
        kind = spec["kind"]
        allowed = _STAGE_KEYS.get(kind)
        if allowed is None:
            raise DataFormatError(f"stage {i}: unknown stage kind {kind!r}")
        extra = set(spec) - allowed
        if extra:
            raise DataFormatError(
                f"stage {i}: unknown keys {sorted(extra)} for kind {kind!r}"
            )
        if kind == "corrector":
            has_nbest = "nbest_path" in spec
            has_rules = "rules_path" in spec
            if has_nbest == has_rules:
                raise DataFormatError(
                    f"stage {i}: corrector needs exactly one of nbest_path/rules_path"
                )
            if has_nbest:
                corrector = FileCorrector.from_file(
                    _resolve(base_dir, spec["nbest_path"])
                )
            else:
                corrector = RuleCorrector.from_file(
                    _resolve(base_dir, spec["rules_path"])
                )
            stages.append(CorrectorStage(corrector))
        elif kind == "rescore":
            if "weights_path" not in spec:
                raise DataFormatError(f"stage {i}: rescore needs weights_path")
            model = LinearModel.from_file(_resolve(base_dir, spec["weights_path"]))
            annotators = build_annotators(spec.get("annotators", ()), base_dir)
            stages.append(RescoreStage(model, annotators))
        else:
            for key in ("lexicon_path", "bpe_path", "char_lm_path", "word_lm_path"):
                if key not in spec:
                    raise DataFormatError(f"stage {i}: spellcheck needs {key}")
            stages.append(
                SpellcheckStage(
                    lexicon=Lexicon.from_file(_resolve(base_dir, spec["lexicon_path"])),
                    bpe=BpeSegmenter.from_file(_resolve(base_dir, spec["bpe_path"])),
                    char_lm=ArpaLanguageModel.from_file(
                        _resolve(base_dir, spec["char_lm_path"])
                    ),
                    word_lm=ArpaLanguageModel.from_file(
                        _resolve(base_dir, spec["word_lm_path"])
                    ),
                    lambda_char=float(spec.get("lambda_char", 1.0)),
                    lambda_lm=float(spec.get("lambda_lm", 1.0)),
                    tau=float(spec.get("tau", 1.0)),
                )
            )
    return stages


def load_pipeline(path) -> list:
    """Read a JSON pipeline configuration and build its stages."""
    with open(path, encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid JSON: {exc}", path=path) from None
    return build_pipeline(config, base_dir=os.path.dirname(os.path.abspath(path)))

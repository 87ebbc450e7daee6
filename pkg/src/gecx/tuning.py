"""Weight tuning over fixed n-best lists: MERT, batch MIRA, grid search.

All tuners work against a decomposable metric: an object that turns one
(sentence, hypothesis) pair into a vector of sufficient statistics and a
summed statistics vector into a corpus score.  M2 counts and GLEU n-gram
statistics both fit this shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import DataFormatError
from .metrics.fscore import fbeta_counts
from .metrics.gleu import corpus_score_from_stats, sentence_stats
from .metrics.m2 import GoldAnnotation, best_sentence_stats
from .nbest import Hypothesis, LinearModel, NBestList, linear_rescore
from .validation import check_sentence

IMPROVEMENT_THRESHOLD = 1e-6

DEFAULT_LM_GRID = tuple(round(0.05 * i, 2) for i in range(21))


def _require_decomposable(metric) -> None:
    if not (hasattr(metric, "sufficient_stats") and hasattr(metric, "corpus_score")):
        raise TypeError(
            "metric is not decomposable: it must provide sufficient_stats() "
            "and corpus_score()"
        )


class M2TuningMetric:
    """Decomposable M2 statistics (tp, fp, fn) against gold annotations.

    Per-hypothesis stats use the sentence-local best annotator and credit
    option, so they do not depend on corpus history.
    """

    def __init__(
        self,
        gold: Sequence[GoldAnnotation],
        max_unchanged: int = 2,
        beta: float = 0.5,
    ):
        self.gold = list(gold)
        self.max_unchanged = max_unchanged
        self.beta = beta

    def sufficient_stats(self, sentence_id: int, tokens: Sequence[str]) -> np.ndarray:
        if sentence_id >= len(self.gold):
            raise DataFormatError(
                f"sentence id {sentence_id} has no gold annotation"
            )
        stats = best_sentence_stats(
            self.gold[sentence_id], tokens, self.max_unchanged, self.beta
        )
        return np.asarray(stats, dtype=np.float64)

    def corpus_score(self, stats: np.ndarray) -> float:
        tp, fp, fn = stats
        return fbeta_counts(tp, fp, fn, self.beta)


class GleuTuningMetric:
    """Decomposable GLEU statistics with one fixed reference per sentence."""

    def __init__(
        self,
        sources: Sequence[Sequence[str]],
        references: Sequence[Sequence[Sequence[str]]],
        max_n: int = 4,
        reference_index: int = 0,
    ):
        if len(sources) != len(references):
            raise ValueError("sources and references differ in length")
        self.max_n = max_n
        self.sources = [check_sentence(s) for s in sources]
        self.references = []
        for i, options in enumerate(references):
            if reference_index >= len(options):
                raise ValueError(f"sentence {i} lacks reference {reference_index}")
            self.references.append(check_sentence(options[reference_index]))

    def sufficient_stats(self, sentence_id: int, tokens: Sequence[str]) -> np.ndarray:
        if sentence_id >= len(self.sources):
            raise DataFormatError(f"sentence id {sentence_id} has no source")
        stats = sentence_stats(
            self.sources[sentence_id],
            self.references[sentence_id],
            tuple(tokens),
            self.max_n,
        )
        return np.asarray(stats, dtype=np.float64)

    def corpus_score(self, stats: np.ndarray) -> float:
        return corpus_score_from_stats(stats, self.max_n)


# -- exact line search (MERT inner loop) --------------------------------------


@dataclass(frozen=True)
class LineSearchResult:
    """Best step size along a direction, with its metric plateau."""

    gamma: float
    score: float
    lo: float
    hi: float


def _upper_envelope(
    intercepts: Sequence[float], slopes: Sequence[float]
) -> list[tuple[float, int]]:
    """Segments of max_h(intercept_h + gamma * slope_h) over gamma.

    Returns (start_gamma, hypothesis_index) pairs; the first start is
    -inf.  Equal lines keep the lowest hypothesis index.
    """
    order = sorted(
        range(len(intercepts)), key=lambda h: (slopes[h], -intercepts[h], h)
    )
    hull: list[tuple[float, int]] = []
    for h in order:
        crossing = None
        dominated = False
        while hull:
            start, top = hull[-1]
            if slopes[h] == slopes[top]:
                # Sorted order guarantees the kept line has the higher
                # intercept (or the same one with a lower index).
                dominated = True
                break
            crossing = (intercepts[top] - intercepts[h]) / (slopes[h] - slopes[top])
            if crossing <= start:
                hull.pop()
                crossing = None
            else:
                break
        if dominated:
            continue
        hull.append((float("-inf") if not hull else crossing, h))
    return hull


def exact_line_search(
    features: Sequence[np.ndarray],
    stats: Sequence[np.ndarray],
    weights: np.ndarray,
    direction: np.ndarray,
    metric,
) -> LineSearchResult:
    """Maximise the corpus metric along ``weights + gamma * direction``.

    ``features[s]`` is the (n_hyp, n_feat) matrix of sentence ``s`` and
    ``stats[s]`` its per-hypothesis sufficient statistics.  The metric is
    piecewise constant in gamma; every plateau induced by the per-sentence
    upper envelopes is evaluated once and the midpoint of the best plateau
    is returned (leftmost plateau on ties).
    """
    events: list[tuple[float, int, int, int]] = []
    stat_sum = np.zeros_like(stats[0][0], dtype=np.float64)
    for s, (feat, stat) in enumerate(zip(features, stats)):
        intercepts = feat @ weights
        slopes = feat @ direction
        hull = _upper_envelope(intercepts.tolist(), slopes.tolist())
        stat_sum = stat_sum + stat[hull[0][1]]
        previous = hull[0][1]
        for start, hyp in hull[1:]:
            events.append((start, s, previous, hyp))
            previous = hyp
    events.sort(key=lambda e: e[0])

    best: tuple[float, float, float] | None = None  # score, lo, hi
    lo = float("-inf")
    idx = 0
    current = stat_sum.astype(np.float64)
    while True:
        hi = events[idx][0] if idx < len(events) else float("inf")
        if hi > lo:
            score = metric.corpus_score(current)
            if best is None or score > best[0]:
                best = (score, lo, hi)
        if idx >= len(events):
            break
        boundary = events[idx][0]
        while idx < len(events) and events[idx][0] == boundary:
            _, s, old, new = events[idx]
            current = current + stats[s][new] - stats[s][old]
            idx += 1
        lo = boundary

    score, lo, hi = best
    if math.isinf(lo) and math.isinf(hi):
        gamma = 0.0
    elif math.isinf(lo):
        gamma = hi - 1.0
    elif math.isinf(hi):
        gamma = lo + 1.0
    else:
        gamma = (lo + hi) / 2.0
    return LineSearchResult(gamma=gamma, score=score, lo=lo, hi=hi)


def _feature_matrix(nbest: NBestList, names: Sequence[str]) -> np.ndarray:
    return np.array(
        [[h.features.get(n, 0.0) for n in names] for h in nbest.hypotheses],
        dtype=np.float64,
    )


def _stat_matrix(nbest: NBestList, metric) -> np.ndarray:
    return np.vstack(
        [metric.sufficient_stats(nbest.sentence_id, h.tokens) for h in nbest.hypotheses]
    )


def _decode_score(
    features: Sequence[np.ndarray], stats: Sequence[np.ndarray], weights: np.ndarray, metric
) -> float:
    total = np.zeros_like(stats[0][0], dtype=np.float64)
    for feat, stat in zip(features, stats):
        total = total + stat[int(np.argmax(feat @ weights))]
    return metric.corpus_score(total)


def mert_tune(
    nbests: Sequence[NBestList],
    metric,
    init: LinearModel,
    n_random_directions: int = 8,
    seed: int = 42,
    max_iterations: int = 100,
) -> LinearModel:
    """Minimum-error-rate training with an exact 1-D line search.

    Directions are the coordinate axes of the features named by ``init``
    plus ``n_random_directions`` seeded random directions per iteration.
    A step is taken when the line search improves the corpus metric by
    more than 1e-6; tuning stops when a full iteration finds no such
    step.  The best weights seen anywhere (including the start) are
    returned.
    """
    _require_decomposable(metric)
    if not nbests:
        raise ValueError("no n-best lists to tune on")
    names = sorted(init.weights)
    if not names:
        raise ValueError("initial model has no features")
    features = [_feature_matrix(nb, names) for nb in nbests]
    stats = [_stat_matrix(nb, metric) for nb in nbests]
    rng = np.random.default_rng(seed)

    weights = np.array([init.weights[n] for n in names], dtype=np.float64)
    current = _decode_score(features, stats, weights, metric)
    best_weights, best_score = weights.copy(), current

    for _ in range(max_iterations):
        improved = False
        directions = [np.eye(len(names))[i] for i in range(len(names))]
        for _ in range(n_random_directions):
            vec = rng.normal(size=len(names))
            norm = float(np.linalg.norm(vec))
            if norm > 0:
                directions.append(vec / norm)
        for direction in directions:
            result = exact_line_search(features, stats, weights, direction, metric)
            if result.score > current + IMPROVEMENT_THRESHOLD:
                weights = weights + result.gamma * direction
                current = _decode_score(features, stats, weights, metric)
                improved = True
                if current > best_score:
                    best_score = current
                    best_weights = weights.copy()
        if not improved:
            break
    return LinearModel(dict(zip(names, best_weights.tolist())))


def mira_tune(
    nbests: Sequence[NBestList],
    metric,
    init: LinearModel,
    C: float = 0.01,
    epochs: int = 10,
    seed: int = 42,
) -> LinearModel:
    """Batch hope/fear MIRA over fixed n-best lists.

    Hope is the hypothesis maximising model score plus metric gain, fear
    the one maximising model score minus gain, where gain is the corpus
    metric delta of swapping the sentence's current-best statistics in a
    running background.  Weights are averaged over each epoch and the
    epoch average (or the initial model) scoring best on the n-best
    corpus is returned.
    """
    _require_decomposable(metric)
    if not nbests:
        raise ValueError("no n-best lists to tune on")
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")

    feats: list[list[dict[str, float]]] = [
        [dict(h.features) for h in nb.hypotheses] for nb in nbests
    ]
    stats = [_stat_matrix(nb, metric) for nb in nbests]
    n_sentences = len(nbests)
    rng = np.random.default_rng(seed)

    def dot(weights: dict[str, float], feat: dict[str, float]) -> float:
        return sum(weights.get(name, 0.0) * value for name, value in feat.items())

    def decode(weights: dict[str, float]) -> list[int]:
        picks = []
        for sentence in feats:
            best_idx, best_val = 0, -math.inf
            for i, feat in enumerate(sentence):
                val = dot(weights, feat)
                if val > best_val:
                    best_idx, best_val = i, val
            picks.append(best_idx)
        return picks

    def corpus(weights: dict[str, float]) -> float:
        picks = decode(weights)
        total = np.zeros_like(stats[0][0])
        for s, pick in enumerate(picks):
            total = total + stats[s][pick]
        return metric.corpus_score(total)

    weights = dict(init.weights)
    candidates: list[tuple[float, dict[str, float]]] = [(corpus(weights), dict(weights))]

    for _ in range(epochs):
        picks = decode(weights)
        background = np.zeros_like(stats[0][0])
        for s, pick in enumerate(picks):
            background = background + stats[s][pick]
        base_score = metric.corpus_score(background)

        weight_sum: dict[str, float] = {}
        for s in rng.permutation(n_sentences):
            sentence = feats[s]
            gains = [
                metric.corpus_score(background - stats[s][picks[s]] + stats[s][h])
                - base_score
                for h in range(len(sentence))
            ]
            model = [dot(weights, feat) for feat in sentence]
            hope = max(range(len(sentence)), key=lambda h: (model[h] + gains[h], -h))
            fear = max(range(len(sentence)), key=lambda h: (model[h] - gains[h], -h))
            delta: dict[str, float] = dict(sentence[hope])
            for name, value in sentence[fear].items():
                delta[name] = delta.get(name, 0.0) - value
            sq_norm = sum(v * v for v in delta.values())
            loss = (gains[hope] - gains[fear]) - (model[hope] - model[fear])
            if loss > 0 and sq_norm > 0:
                eta = min(C, loss / sq_norm)
                for name, value in delta.items():
                    if value:
                        weights[name] = weights.get(name, 0.0) + eta * value
            for name, value in weights.items():
                weight_sum[name] = weight_sum.get(name, 0.0) + value

        average = {name: value / n_sentences for name, value in weight_sum.items()}
        candidates.append((corpus(average), average))

    best_score, best_weights = candidates[0]
    for score, cand in candidates[1:]:
        if score > best_score:
            best_score, best_weights = score, cand
    return LinearModel(best_weights)


def grid_search_lm_weight(
    nbests: Sequence[NBestList],
    metric,
    base: LinearModel,
    feature_name: str,
    grid: Sequence[float] = DEFAULT_LM_GRID,
) -> float:
    """Pick the grid value for one feature weight maximising the metric.

    Ties resolve to the smallest value.  The feature must occur somewhere
    in the n-best lists.
    """
    _require_decomposable(metric)
    if not nbests:
        raise ValueError("no n-best lists to tune on")
    if not grid:
        raise ValueError("empty grid")
    if not any(feature_name in h.features for nb in nbests for h in nb.hypotheses):
        raise DataFormatError(
            f"feature {feature_name!r} absent from every hypothesis"
        )
    names = sorted(set(base.weights) | {feature_name})
    features = [_feature_matrix(nb, names) for nb in nbests]
    stats = [_stat_matrix(nb, metric) for nb in nbests]
    column = names.index(feature_name)
    base_vec = np.array([base.weights.get(n, 0.0) for n in names], dtype=np.float64)

    best_value, best_score = None, -math.inf
    for value in sorted(set(grid)):
        vec = base_vec.copy()
        vec[column] = value
        score = _decode_score(features, stats, vec, metric)
        if score > best_score:
            best_value, best_score = value, score
    return best_value


def average_weights(models: Sequence[LinearModel]) -> LinearModel:
    """Uniform average of weight vectors; missing features count as zero."""
    if not models:
        raise ValueError("no models to average")
    names = sorted({name for model in models for name in model.weights})
    return LinearModel(
        {
            name: sum(model.weights.get(name, 0.0) for model in models) / len(models)
            for name in names
        }
    )


class MertTuner(BaseEstimator):
    """Estimator wrapper around :func:`mert_tune`."""

    def __init__(
        self,
        metric=None,
        init: LinearModel | None = None,
        n_random_directions: int = 8,
        seed: int = 42,
        max_iterations: int = 100,
    ):
        self.metric = metric
        self.init = init
        self.n_random_directions = n_random_directions
        self.seed = seed
        self.max_iterations = max_iterations

    def fit(self, X: Sequence[NBestList], y=None):
        init = self.init
        if init is None:
            names = sorted({n for nb in X for h in nb.hypotheses for n in h.features})
            init = LinearModel({n: 0.0 for n in names})
        model = mert_tune(
            X,
            self.metric,
            init,
            n_random_directions=self.n_random_directions,
            seed=self.seed,
            max_iterations=self.max_iterations,
        )
        self.weights_ = model.weights
        self.model_ = model
        return self

    def predict(self, X: Sequence[NBestList]) -> list[tuple[str, ...]]:
        check_is_fitted(self, "model_")
        return [linear_rescore(nb, self.model_).tokens for nb in X]


class MiraTuner(BaseEstimator):
    """Estimator wrapper around :func:`mira_tune`."""

    def __init__(
        self,
        metric=None,
        init: LinearModel | None = None,
        C: float = 0.01,
        epochs: int = 10,
        seed: int = 42,
    ):
        self.metric = metric
        self.init = init
        self.C = C
        self.epochs = epochs
        self.seed = seed

    def fit(self, X: Sequence[NBestList], y=None):
        init = self.init
        if init is None:
            names = sorted({n for nb in X for h in nb.hypotheses for n in h.features})
            init = LinearModel({n: 0.0 for n in names})
        model = mira_tune(
            X, self.metric, init, C=self.C, epochs=self.epochs, seed=self.seed
        )
        self.weights_ = model.weights
        self.model_ = model
        return self

    def predict(self, X: Sequence[NBestList]) -> list[tuple[str, ...]]:
        check_is_fitted(self, "model_")
        return [linear_rescore(nb, self.model_).tokens for nb in X]

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gecx.errors import DataFormatError
from gecx.lm import NGramLanguageModel
from gecx.nbest import (
    ClassLmScoreAnnotator,
    DenseEditAnnotator,
    Hypothesis,
    LinearModel,
    LmScoreAnnotator,
    NBestList,
    SparsePatternAnnotator,
    annotate_features,
    linear_rescore,
    parse_nbest,
    rescore_nbest,
    write_nbest,
)
from gecx.tokenization import WordClassMap

NBEST_SAMPLE = """\
0 ||| the cat sat ||| Lm= -4.5 Wp= 3.0 ||| -1.5
0 ||| the cat sit ||| Lm= -6.0 Wp= 3.0 ||| -3.0
2 ||| hello there ||| Lm= -2.0 Wp= 2.0 ||| -0.5
"""


class TestParsing:
    def test_parse_sample(self):
        lists = parse_nbest(NBEST_SAMPLE.splitlines())
        assert [nb.sentence_id for nb in lists] == [0, 2]
        first = lists[0]
        assert first.best.tokens == ("the", "cat", "sat")
        assert first.best.features == {"Lm": -4.5, "Wp": 3.0}
        assert first.best.model_score == -1.5

    def test_multi_value_features_get_indexed_names(self):
        line = "0 ||| a b ||| Ops= 1 0 2 Lm= -1.0 ||| -2.0"
        lists = parse_nbest([line])
        feats = lists[0].best.features
        assert feats == {"Ops0": 1.0, "Ops1": 0.0, "Ops2": 2.0, "Lm": -1.0}

    def test_id_gaps_allowed_but_decreasing_ids_rejected(self):
        ok = ["0 ||| a ||| F= 1 ||| 1", "3 ||| b ||| F= 1 ||| 1"]
        assert [nb.sentence_id for nb in parse_nbest(ok)] == [0, 3]
        bad = ["1 ||| a ||| F= 1 ||| 1", "0 ||| b ||| F= 1 ||| 1"]
        with pytest.raises(DataFormatError) as err:
            parse_nbest(bad)
        assert "2" in str(err.value)

    def test_wrong_field_count_rejected(self):
        with pytest.raises(DataFormatError):
            parse_nbest(["0 ||| a ||| F= 1"])

    def test_duplicate_feature_name_rejected(self):
        with pytest.raises(DataFormatError):
            parse_nbest(["0 ||| a ||| F= 1 F= 2 ||| 1"])

    def test_non_numeric_score_rejected(self):
        with pytest.raises(DataFormatError):
            parse_nbest(["0 ||| a ||| F= 1 ||| zero"])

    def test_hypotheses_sorted_by_model_score(self):
        lines = [
            "0 ||| worst ||| F= 0 ||| -9.0",
            "0 ||| best ||| F= 0 ||| 2.0",
            "0 ||| middle ||| F= 0 ||| 0.5",
        ]
        nb = parse_nbest(lines)[0]
        assert [h.tokens[0] for h in nb.hypotheses] == ["best", "middle", "worst"]

    def test_round_trip(self, tmp_path):
        lists = parse_nbest(NBEST_SAMPLE.splitlines())
        path = tmp_path / "out.nbest"
        write_nbest(lists, path)
        again = parse_nbest(path)
        assert again == lists


class TestModels:
    def test_missing_feature_scores_zero(self):
        model = LinearModel({"a": 2.0})
        assert model.score({"b": 3.0}) == 0.0

    def test_score_is_dot_product(self):
        model = LinearModel({"a": 2.0, "b": -1.0})
        assert model.score({"a": 3.0, "b": 4.0}) == pytest.approx(2.0)

    def test_file_round_trip(self, tmp_path):
        model = LinearModel({"Lm": -0.25, "Wp": 1e-9})
        path = tmp_path / "weights.tsv"
        model.to_file(path)
        assert LinearModel.from_file(path).weights == model.weights

    def test_rescore_keeps_rank_on_ties(self):
        lines = [
            "0 ||| first ||| F= 1 ||| 5.0",
            "0 ||| second ||| F= 1 ||| 4.0",
        ]
        nb = parse_nbest(lines)[0]
        best = linear_rescore(nb, LinearModel({"F": 1.0}))
        assert best.tokens == ("first",)

    def test_rescore_nbest_reorders(self):
        lines = [
            "0 ||| old-best ||| F= 0.0 G= 1.0 ||| 9.0",
            "0 ||| new-best ||| F= 5.0 G= 1.0 ||| 1.0",
        ]
        rescored = rescore_nbest(parse_nbest(lines)[0], LinearModel({"F": 1.0}))
        assert rescored.best.tokens == ("new-best",)
        # originals untouched
        assert parse_nbest(lines)[0].best.tokens == ("old-best",)

    @given(scale=st.floats(min_value=0.001, max_value=100.0))
    def test_positive_scaling_keeps_argmax(self, scale):
        lines = [
            "0 ||| x ||| F= 2.0 G= -1.0 ||| 0",
            "0 ||| y ||| F= 1.0 G= 3.0 ||| 0",
            "0 ||| z ||| F= -2.0 G= 0.5 ||| 0",
        ]
        nb = parse_nbest(lines)[0]
        base = LinearModel({"F": 1.0, "G": 0.5})
        scaled = LinearModel({k: v * scale for k, v in base.weights.items()})
        assert linear_rescore(nb, base).tokens == linear_rescore(nb, scaled).tokens


class TestValidation:
    def test_hypothesis_rejects_non_finite_feature(self):
        with pytest.raises(ValueError):
            Hypothesis(tokens=("a",), features={"f": math.inf}, model_score=0.0)

    def test_hypothesis_rejects_whitespace_in_name(self):
        with pytest.raises(ValueError):
            Hypothesis(tokens=("a",), features={"bad name": 1.0}, model_score=0.0)

    def test_nbest_list_requires_hypotheses(self):
        with pytest.raises(ValueError):
            NBestList(sentence_id=0, hypotheses=())

    def test_nbest_list_rejects_negative_id(self):
        hyp = Hypothesis(tokens=("a",), features={}, model_score=0.0)
        with pytest.raises(ValueError):
            NBestList(sentence_id=-1, hypotheses=(hyp,))


class TestAnnotators:
    def make_nbest(self, tokens_list, sentence_id=0):
        hyps = tuple(
            Hypothesis(tokens=tuple(toks), features={}, model_score=0.0)
            for toks in tokens_list
        )
        return NBestList(sentence_id=sentence_id, hypotheses=hyps)

    def test_lm_annotator_emits_negated_logprob(self):
        lm = NGramLanguageModel(order=1).fit([["a", "a", "b"]])
        annotator = LmScoreAnnotator("Lm", lm)
        feats = annotator.annotate(["a"], ("a",))
        assert feats["Lm"] == pytest.approx(-(math.log(0.4) + math.log(0.2)))

    def test_lm_annotator_normalized_variant(self):
        lm = NGramLanguageModel(order=1).fit([["a", "a", "b"]])
        annotator = LmScoreAnnotator("LmNorm", lm, normalized=True)
        feats = annotator.annotate(["a"], ("a",))
        assert feats["LmNorm"] == pytest.approx(
            -(math.log(0.4) + math.log(0.2)) / 2.0
        )

    def test_class_lm_annotator_projects_hypothesis(self):
        classes = WordClassMap({"the": "C1", "dog": "C2", "cat": "C2"})
        lm = NGramLanguageModel(order=2).fit([["C1", "C2"]])
        annotator = ClassLmScoreAnnotator("ClassLm", lm, classes)
        a = annotator.annotate(["the", "dog"], ("the", "dog"))
        b = annotator.annotate(["the", "dog"], ("the", "cat"))
        assert a["ClassLm"] == pytest.approx(b["ClassLm"])

    def test_dense_annotator_uses_source(self):
        annotator = DenseEditAnnotator()
        feats = annotator.annotate(["a", "b"], ("a", "c"))
        assert feats["n_sub"] == 1.0
        assert feats["n_match"] == 1.0

    def test_sparse_annotator_patterns(self):
        classes = WordClassMap({"dog": "C12"})
        annotator = SparsePatternAnnotator(classes)
        feats = annotator.annotate(["the", "dog", "eat"], ("the", "dog", "eats"))
        assert feats == {"sub(eat→eats)|L=C12|R=</s>": 1.0}

    def test_annotate_features_adds_columns(self):
        lm = NGramLanguageModel(order=1).fit([["a", "b"]])
        nbests = [self.make_nbest([["a"], ["b"]], sentence_id=0)]
        sources = [["a"]]
        out = annotate_features(nbests, sources, [LmScoreAnnotator("Lm", lm)])
        assert all("Lm" in h.features for h in out[0].hypotheses)

    def test_annotate_features_respects_sentence_ids(self):
        lm = NGramLanguageModel(order=1).fit([["a", "b"]])
        nbests = [self.make_nbest([["a"]], sentence_id=1)]
        sources = [["zzz"], ["a"]]
        out = annotate_features(nbests, sources, [DenseEditAnnotator()])
        assert out[0].best.features["n_match"] == 1.0

    def test_annotate_features_rejects_unknown_id(self):
        nbests = [self.make_nbest([["a"]], sentence_id=5)]
        with pytest.raises(DataFormatError):
            annotate_features(nbests, [["a"]], [DenseEditAnnotator()])

    def test_annotate_features_rejects_name_collision(self):
        lm = NGramLanguageModel(order=1).fit([["a", "b"]])
        nbests = [self.make_nbest([["a"]], sentence_id=0)]
        with pytest.raises(DataFormatError):
            annotate_features(
                nbests, [["a"]], [LmScoreAnnotator("Lm", lm), LmScoreAnnotator("Lm", lm)]
            )

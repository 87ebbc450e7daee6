import pytest

from gecx.features import (
    DENSE_FEATURES,
    FeatureVector,
    dense_edit_features,
    sparse_pattern_features,
)
from gecx.tokenization import WordClassMap


class TestDenseEditFeatures:
    def test_feature_names_are_stable(self):
        assert DENSE_FEATURES == (
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

    def test_single_substitution(self):
        feats = dense_edit_features(["becom"], ["becomes"]).dense
        assert feats["n_sub"] == 1
        assert feats["word_lev_dist"] == 1
        assert feats["char_ins"] == 2
        assert feats["char_del"] == 0
        assert feats["char_sub"] == 0
        assert feats["char_dist"] == 2

    def test_identity_pair(self):
        feats = dense_edit_features(["a", "b"], ["a", "b"]).dense
        assert feats["n_match"] == 2
        for name in DENSE_FEATURES:
            if name != "n_match":
                assert feats[name] == 0

    def test_char_counts_only_over_substitutions(self):
        # Inserting a whole word must not inflate character totals.
        feats = dense_edit_features(["a"], ["a", "tremendous"]).dense
        assert feats["n_ins"] == 1
        assert feats["char_dist"] == 0

    def test_all_dense_names_present(self):
        feats = dense_edit_features(["x"], ["y"]).dense
        assert tuple(feats) == DENSE_FEATURES

    def test_mixed_edits(self):
        feats = dense_edit_features(["the", "cat", "sit"], ["cat", "sat", "here"]).dense
        assert feats["word_lev_dist"] == 3
        assert feats["n_match"] + feats["n_sub"] + feats["n_del"] == 3


class TestSparsePatternFeatures:
    def test_substitution_pattern_with_class_context(self):
        classes = WordClassMap({"dog": "C12", "the": "C3"})
        feats = sparse_pattern_features(
            ["the", "dog", "eat"], ["the", "dog", "eats"], classes
        )
        assert feats.sparse == {"sub(eat→eats)|L=C12|R=</s>": 1}

    def test_sentence_boundary_classes(self):
        feats = sparse_pattern_features(["eat"], ["eats"], WordClassMap({}))
        assert feats.sparse == {"sub(eat→eats)|L=<s>|R=</s>": 1}

    def test_insertion_and_deletion_patterns(self):
        classes = WordClassMap({"cat": "C1", "sat": "C2"})
        ins = sparse_pattern_features(["cat", "sat"], ["the", "cat", "sat"], classes)
        assert ins.sparse == {"ins(→the)|L=<s>|R=C1": 1}
        dele = sparse_pattern_features(["the", "cat", "sat"], ["cat", "sat"], classes)
        assert dele.sparse == {"del(the→)|L=<s>|R=C1": 1}

    def test_multi_token_parts_joined_with_underscore(self):
        feats = sparse_pattern_features(["a", "lot"], ["allot"], WordClassMap({}))
        assert feats.sparse == {"sub(a_lot→allot)|L=<s>|R=</s>": 1}

    def test_identity_yields_no_patterns(self):
        assert sparse_pattern_features(["x"], ["x"], WordClassMap({})).sparse == {}

    def test_unmapped_context_uses_unknown_class(self):
        feats = sparse_pattern_features(
            ["eat", "and", "eat"], ["eats", "and", "eats"], WordClassMap({})
        )
        assert feats.sparse == {
            "sub(eat→eats)|L=<s>|R=UNK-CLASS": 1,
            "sub(eat→eats)|L=UNK-CLASS|R=</s>": 1,
        }


class TestFeatureVector:
    def test_as_dict_merges(self):
        vec = FeatureVector(dense={"a": 1.0}, sparse={"b": 2})
        assert vec.as_dict() == {"a": 1.0, "b": 2.0}

    def test_name_collision_rejected(self):
        vec = FeatureVector(dense={"a": 1.0}, sparse={"a": 2})
        with pytest.raises(ValueError):
            vec.as_dict()

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            FeatureVector(dense={"a": float("nan")}, sparse={})

    def test_nonpositive_sparse_count_rejected(self):
        with pytest.raises(ValueError):
            FeatureVector(dense={}, sparse={"a": 0})

    def test_sparse_counts_become_floats(self):
        merged = FeatureVector(sparse={"p": 3}).as_dict()
        assert merged["p"] == 3.0
        assert isinstance(merged["p"], float)

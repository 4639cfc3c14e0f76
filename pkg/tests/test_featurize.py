import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ballpark.core import FeatureMatrix
from ballpark.featurize import (append_bias, encode_tabular, fit_tabular,
                                fit_vocabulary, tfidf_matrix, tokenize,
                                transform_tfidf)


def dense(idx, vals, n):
    out = np.zeros(n)
    out[idx] = vals
    return out


class TestTokenize:
    def test_rules(self):
        assert tokenize("Hello, WORLD! a 42 x9 r2d2") == ["hello", "world",
                                                           "x9", "r2d2"]


class TestVocabulary:
    corpus = [["a", "b"], ["a"]]

    def test_counts(self):
        v = fit_vocabulary(self.corpus)
        assert v.index == {"a": 0, "b": 1}
        assert v.df == {"a": 2, "b": 1}

    def test_idf(self):
        v = fit_vocabulary(self.corpus)
        assert v.idf["a"] == pytest.approx(1.0, abs=1e-12)
        assert v.idf["b"] == pytest.approx(math.log(1.5) + 1, abs=1e-12)
        assert v.idf["b"] == pytest.approx(1.4055, abs=1e-4)

    def test_min_df(self):
        assert fit_vocabulary(self.corpus, min_df=2).index == {"a": 0}

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            fit_vocabulary([])

    def test_round_trip(self):
        v = fit_vocabulary([["x", "y"], ["y", "z"], ["z"]])
        w = type(v).from_dict(v.to_dict())
        assert w.index == v.index and w.idf == v.idf

    def test_idf_decreasing_in_df(self):
        v = fit_vocabulary([["a", "b", "c"], ["a", "b"], ["a"]])
        assert v.idf["a"] < v.idf["b"] < v.idf["c"]


class TestTfidf:
    vocab = fit_vocabulary([["a", "b"], ["a"]])

    def test_two_terms(self):
        row = dense(*transform_tfidf(["a", "b"], self.vocab), 2)
        raw = np.array([1.0, math.log(1.5) + 1])
        np.testing.assert_allclose(row, raw / np.linalg.norm(raw), atol=1e-12)
        np.testing.assert_allclose(row, [0.5797, 0.8148], atol=1e-4)

    def test_single_term(self):
        np.testing.assert_allclose(
            dense(*transform_tfidf(["a"], self.vocab), 2), [1.0, 0.0])

    def test_unknown_gives_zero_row(self):
        idx, vals = transform_tfidf(["zzz"], self.vocab)
        assert len(idx) == 0 and len(vals) == 0

    def test_counts_multiply(self):
        row = dense(*transform_tfidf(["a", "a", "b"], self.vocab), 2)
        raw = np.array([2.0, math.log(1.5) + 1])
        np.testing.assert_allclose(row, raw / np.linalg.norm(raw), atol=1e-12)

    @given(st.lists(st.lists(st.sampled_from("abcdefg"), max_size=8),
                    min_size=1, max_size=8))
    def test_unit_norm_rows(self, docs):
        vocab = fit_vocabulary(docs)
        m = tfidf_matrix(docs, vocab).matrix.toarray()
        norms = np.linalg.norm(m, axis=1)
        for d, n in zip(docs, norms):
            assert n == pytest.approx(1.0 if d else 0.0, abs=1e-9)

    def test_deterministic(self):
        docs = [["a", "b", "a"], ["b"]]
        a = tfidf_matrix(docs, self.vocab).matrix
        b = tfidf_matrix(docs, self.vocab).matrix
        assert (a != b).nnz == 0


class TestTabular:
    def test_standardize(self):
        rows = [{"x": "0"}, {"x": "2"}]
        s = fit_tabular(rows, ["x"], [])
        np.testing.assert_allclose(encode_tabular(rows, s).matrix.toarray(),
                                   [[-1.0], [1.0]])

    def test_one_hot(self):
        rows = [{"g": "M"}, {"g": "F"}]
        s = fit_tabular(rows, [], ["g"])
        s.categories["g"] = ["M", "F"]
        np.testing.assert_array_equal(
            encode_tabular(rows, s).matrix.toarray(), [[1, 0], [0, 1]])

    def test_unseen_category(self):
        s = fit_tabular([{"g": "M"}], [], ["g"])
        with pytest.raises(ValueError, match="'X'.*'g'"):
            encode_tabular([{"g": "X"}], s)

    def test_constant_column(self):
        s = fit_tabular([{"x": "3"}, {"x": "3"}], ["x"], [])
        np.testing.assert_array_equal(
            encode_tabular([{"x": "3"}], s).matrix.toarray(), [[0.0]])


class TestBias:
    def test_appends_ones(self):
        m = append_bias(FeatureMatrix.from_dense(np.arange(6.).reshape(2, 3)))
        assert m.n_cols == 4 and m.bias_index == 3
        np.testing.assert_array_equal(m.matrix.toarray()[:, 3], [1, 1])

    def test_zero_row(self):
        m = append_bias(FeatureMatrix.from_dense(np.zeros((1, 3))))
        assert m.matrix.nnz == 1
        assert m.matrix[0, 3] == 1.0

    def test_twice_errors(self):
        m = append_bias(FeatureMatrix.from_dense(np.zeros((1, 3))))
        with pytest.raises(ValueError):
            append_bias(m)

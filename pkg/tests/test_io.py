import numpy as np
import pytest

from ballpark import io
from ballpark.core import Bound, Difference
from ballpark.svm import Model, decision_values


def write(path, text):
    path.write_text(text)
    return str(path)


class TestLoaders:
    def test_text_csv_order(self, tmp_path):
        p = write(tmp_path / "d.csv",
                  "id,text,label\nx,great film,1\ny,bad,-1\nz,meh,?\n")
        ds = io.load_text_csv(p)
        assert ds.ids == ["x", "y", "z"]
        np.testing.assert_array_equal(ds.labels, [1, -1, 0])

    def test_text_csv_without_labels(self, tmp_path):
        ds = io.load_text_csv(write(tmp_path / "d.csv", "id,text\na,b c\n"))
        assert ds.labels is None and ds.texts == ["b c"]

    def test_duplicate_ids(self, tmp_path):
        p = write(tmp_path / "d.csv", "id,text\na,x\na,y\n")
        with pytest.raises(io.FormatError, match="duplicate id"):
            io.load_text_csv(p)

    def test_malformed_row_line_number(self, tmp_path):
        p = write(tmp_path / "d.csv", "id,text,label\na,x,1\nb,y\n")
        with pytest.raises(io.FormatError, match=r"d\.csv:3"):
            io.load_text_csv(p)

    def test_bad_label(self, tmp_path):
        p = write(tmp_path / "d.csv", "id,text,label\na,x,2\n")
        with pytest.raises(io.FormatError, match="label"):
            io.load_text_csv(p)

    def test_svmlight_unlabeled_row(self, tmp_path):
        ds = io.load_svmlight(write(tmp_path / "d.svm", "? 3:1.5 7:2\n"))
        np.testing.assert_array_equal(ds.labels, [0])
        row = ds.matrix.toarray()[0]
        assert row[3] == 1.5 and row[7] == 2.0 and row.sum() == 3.5

    def test_svmlight_errors(self, tmp_path):
        with pytest.raises(io.FormatError, match=":2:"):
            io.load_svmlight(write(tmp_path / "a.svm", "1 0:1\n-1 2:1 1:1\n"))
        with pytest.raises(io.FormatError, match=":1:"):
            io.load_svmlight(write(tmp_path / "b.svm", "1 0:x\n"))

    def test_svmlight_round_trip(self, tmp_path, rng):
        m = rng.normal(size=(4, 5))
        m[m < 0] = 0
        labels = np.array([1, -1, 0, 1])
        p = str(tmp_path / "r.svm")
        io.write_svmlight(p, m, labels)
        ds = io.load_svmlight(p, 5)
        np.testing.assert_array_equal(ds.matrix.toarray(), m)
        np.testing.assert_array_equal(ds.labels, labels)

    def test_tabular(self, tmp_path):
        p = write(tmp_path / "t.csv", "age,sex,label\n30,M,1\n40,F,-1\n")
        ds = io.load_tabular_csv(p)
        assert ds.ids == ["0", "1"] and ds.rows[1] == {"age": "40",
                                                       "sex": "F"}

    def test_unknown_format(self, tmp_path):
        with pytest.raises(io.FormatError):
            io.load_dataset(str(tmp_path / "x"), "parquet")


class TestBags:
    def text_ds(self):
        return io.Dataset("text", ["a", "b", "c"], None,
                          texts=["Great movie", "good not great", "bad"])

    def test_contains_token(self):
        bags = io.assemble_bags(self.text_ds(), [
            {"name": "great", "selector": {"contains_token": "great"}},
            {"name": "both", "selector": {"contains_token": ["good",
                                                             "great"]}}])
        assert bags["great"].members == (0, 1)
        assert bags["both"].members == (1,)

    def test_absent_token(self):
        with pytest.raises(io.FormatError, match="empty bag"):
            io.assemble_bags(self.text_ds(), [
                {"name": "x", "selector": {"contains_token": "awful"}}])

    def test_indices_and_index_list(self):
        bags = io.assemble_bags(self.text_ds(), [
            {"name": "i", "indices": [2, 0]},
            {"name": "l", "selector": {"index_list": [1, 2]}}])
        assert set(bags["i"].members) == {0, 2}
        assert bags["l"].members == (1, 2)
        with pytest.raises(io.FormatError):
            io.assemble_bags(self.text_ds(), [{"name": "i", "indices": [3]}])

    def test_column_equals_conjunction(self):
        ds = io.Dataset("tabular", ["0", "1", "2"], None, rows=[
            {"edu": "Masters", "sex": "F"}, {"edu": "Masters", "sex": "M"},
            {"edu": "HS", "sex": "F"}])
        bags = io.assemble_bags(ds, [
            {"name": "m", "selector": {"column_equals": {"edu": "Masters"}}},
            {"name": "mf", "selector": {"column_equals": {"edu": "Masters",
                                                          "sex": "F"}}}])
        assert bags["m"].members == (0, 1) and bags["mf"].members == (0,)
        with pytest.raises(io.FormatError, match="unknown column"):
            io.assemble_bags(ds, [{"name": "z", "selector": {
                "column_equals": {"age": "3"}}}])

    def test_bag_words(self):
        specs = [{"name": "a", "selector": {"contains_token": "great"}},
                 {"name": "b", "selector": {"contains_token": ["bad", "great"]}},
                 {"name": "c", "indices": [0]}]
        assert io.bag_words(specs) == ["great", "bad"]


class TestConstraints:
    def test_defaults_and_round_trip(self):
        doc = {"bounds": [{"bag": "a", "lower": 0.2}],
               "differences": [{"upper_bag": "a", "lower_bag": "b"}],
               "orderings": [["b", "c"]]}
        cons = io.constraints_from_dict(doc)
        assert cons.bounds == (Bound("a", 0.2, 1.0),)
        assert cons.differences == (Difference("a", "b", 0.0, 1.0),)
        assert cons.extra_orderings == (("b", "c"),)
        assert io.constraints_from_dict(io.constraints_to_dict(cons)) == cons


class TestModelFiles:
    def test_round_trip_bit_equal(self, tmp_path, rng):
        ds = io.Dataset("text", ["a", "b", "c"], None,
                        texts=["one two", "two three", "four"])
        feat, X = io.fit_featurizer(ds)
        model = Model(rng.normal(size=X.n_cols), X.bias_index, feat,
                      {"C": 0.1})
        p = str(tmp_path / "m.json")
        io.write_model(p, model)
        back = io.read_model(p)
        Xt = io.transform(ds, back.featurizer)
        np.testing.assert_array_equal(decision_values(back, Xt),
                                      decision_values(model, X))

    def test_predictions_round_trip(self, tmp_path, rng):
        margins = rng.normal(size=5)
        margins[0] = 0.0
        p = str(tmp_path / "p.csv")
        io.write_predictions(p, list("abcde"), margins)
        ids, m, labels = io.read_predictions(p)
        np.testing.assert_array_equal(m, margins)
        assert labels[0] == 1

    def test_nan_refused(self, tmp_path):
        with pytest.raises(ValueError):
            io.write_json(str(tmp_path / "x.json"), {"v": float("nan")})


class TestFeaturizers:
    def test_remove_words(self):
        ds = io.Dataset("text", ["a", "b"], None,
                        texts=["great plot", "great acting"])
        feat, X = io.fit_featurizer(ds, remove_words=["great"])
        assert "great" not in feat["tokens"]
        assert X.n_cols == 3

    def test_tabular_drop_and_detect(self):
        ds = io.Dataset("tabular", ["0", "1"], None, rows=[
            {"age": "30", "sex": "M", "edu": "HS"},
            {"age": "50", "sex": "F", "edu": "BA"}])
        feat, X = io.fit_featurizer(ds, drop_columns=["edu"])
        assert feat["numeric"] == ["age"] and feat["categorical"] == ["sex"]
        assert io.feature_names(feat) == ["age", "sex=F", "sex=M"]
        np.testing.assert_allclose(X.matrix.toarray(),
                                   [[-1, 0, 1, 1], [1, 1, 0, 1]])

    def test_wrong_kind(self):
        ds = io.Dataset("tabular", ["0"], None, rows=[{"x": "1"}])
        with pytest.raises(io.FormatError):
            io.transform(ds, {"kind": "tfidf", "tokens": [], "df": [],
                              "n_docs": 1})


class TestTopFeatures:
    def test_single_positive(self):
        m = Model(np.array([0.0, 0.7, -0.1, 5.0]), bias_index=3)
        pos, neg = io.top_features(m, ["a", "hella", "b"], 5)
        assert [n for n, _ in pos] == ["hella"]
        assert [n for n, _ in neg] == ["b"]

    def test_k_larger_than_vocab_and_bias_excluded(self):
        m = Model(np.array([0.3, 0.2, -0.5, -0.1, 9.0]), bias_index=4)
        pos, neg = io.top_features(m, list("abcd"), 100)
        assert pos == [("a", 0.3), ("b", 0.2)]
        assert neg == [("c", -0.5), ("d", -0.1)]

    def test_sign_flip_swaps(self, rng):
        w = rng.normal(size=6)
        names = list("abcdef")
        pos, neg = io.top_features(Model(w), names, 3)
        pos2, neg2 = io.top_features(Model(-w), names, 3)
        assert [n for n, _ in pos] == [n for n, _ in neg2]
        assert [n for n, _ in neg] == [n for n, _ in pos2]

    def test_report_uses_vocabulary(self):
        from ballpark.featurize import fit_vocabulary
        vocab = fit_vocabulary([["x", "y"]])
        pos, neg = io.report_top_features(Model(np.array([1.0, -1.0])),
                                          vocab, 1)
        assert pos == [("x", 1.0)] and neg == [("y", -1.0)]

"""File formats: datasets, bag and constraint specs, models, predictions."""

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .core import Bag, BagSet, Bound, ConstraintSet, Difference, FeatureMatrix
from .featurize import (TabularSchema, Vocabulary, append_bias, encode_tabular,
                        fit_tabular, fit_vocabulary, tfidf_matrix, tokenize)
from .svm import Model

FORMATS = ("text-csv", "tabular-csv", "svmlight")


class FormatError(ValueError):
    pass


@dataclass
class Dataset:
    kind: str
    ids: list
    labels: Optional[np.ndarray] = None  # +1/-1, 0 where unknown
    texts: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    matrix: Optional[sp.csr_matrix] = None

    def __len__(self):
        return len(self.ids)

    def subset(self, idx):
        idx = [int(i) for i in idx]
        return Dataset(
            self.kind, [self.ids[i] for i in idx],
            None if self.labels is None else self.labels[idx],
            [self.texts[i] for i in idx] if self.texts else [],
            [self.rows[i] for i in idx] if self.rows else [],
            None if self.matrix is None else self.matrix[idx])


def _parse_label(raw, where):
    raw = raw.strip()
    if raw in ("", "?"):
        return 0
    try:
        v = int(float(raw))
    except ValueError:
        raise FormatError(f"{where}: label {raw!r} is not +1, -1 or ?")
    if v not in (-1, 1) or float(raw) != v:
        raise FormatError(f"{where}: label {raw!r} is not +1, -1 or ?")
    return v


def _check_ids(ids, path):
    seen = {}
    for n, i in enumerate(ids):
        if i in seen:
            raise FormatError(f"{path}: duplicate id {i!r} (rows {seen[i] + 1} "
                              f"and {n + 1})")
        seen[i] = n


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file")
        records = []
        for row in reader:
            if not row:
                continue
            records.append((reader.line_num, row))
    return header, records


def load_text_csv(path):
    header, records = _read_csv(path)
    if "id" not in header or "text" not in header:
        raise FormatError(f"{path}: text-csv needs 'id' and 'text' columns")
    col = {h: k for k, h in enumerate(header)}
    has_label = "label" in col
    ids, texts, labels = [], [], []
    for line, row in records:
        if len(row) != len(header):
            raise FormatError(f"{path}:{line}: expected {len(header)} fields, "
                              f"got {len(row)}")
        ids.append(row[col["id"]])
        texts.append(row[col["text"]])
        if has_label:
            labels.append(_parse_label(row[col["label"]], f"{path}:{line}"))
    _check_ids(ids, path)
    return Dataset("text", ids, np.array(labels) if has_label else None,
                   texts=texts)


def load_tabular_csv(path):
    header, records = _read_csv(path)
    if len(set(header)) != len(header):
        raise FormatError(f"{path}: repeated column names")
    rows, ids, labels = [], [], []
    has_label = "label" in header
    for n, (line, row) in enumerate(records):
        if len(row) != len(header):
            raise FormatError(f"{path}:{line}: expected {len(header)} fields, "
                              f"got {len(row)}")
        rec = dict(zip(header, row))
        ids.append(rec.pop("id") if "id" in rec else str(n))
        if has_label:
            labels.append(_parse_label(rec.pop("label"), f"{path}:{line}"))
        rows.append(rec)
    _check_ids(ids, path)
    return Dataset("tabular", ids, np.array(labels) if has_label else None,
                   rows=rows)


def load_svmlight(path, n_features=None):
    """``label idx:val ...`` per line; ``?`` marks an unlabeled row.

    Indices are 0-based and strictly ascending; ``#`` starts a comment.
    """
    indptr, indices, data, labels = [0], [], [], []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            labels.append(_parse_label(parts[0], f"{path}:{line_no}"))
            last = -1
            for tok in parts[1:]:
                try:
                    k, v = tok.split(":")
                    k, v = int(k), float(v)
                except ValueError:
                    raise FormatError(f"{path}:{line_no}: bad feature {tok!r}")
                if k <= last or k < 0:
                    raise FormatError(f"{path}:{line_no}: indices must be "
                                      "0-based and strictly ascending")
                if not np.isfinite(v):
                    raise FormatError(f"{path}:{line_no}: non-finite value")
                last = k
                indices.append(k)
                data.append(v)
            indptr.append(len(indices))
    width = max(indices, default=-1) + 1
    if n_features is not None:
        if width > n_features:
            raise FormatError(f"{path}: feature index {width - 1} exceeds the "
                              f"model's {n_features} features")
        width = n_features
    m = sp.csr_matrix((np.array(data, dtype=np.float64),
                       np.array(indices, dtype=np.int64), np.array(indptr)),
                      shape=(len(labels), width))
    return Dataset("svmlight", [str(i) for i in range(len(labels))],
                   np.array(labels), matrix=m)


def load_dataset(path, fmt, n_features=None):
    if fmt == "text-csv":
        return load_text_csv(path)
    if fmt == "tabular-csv":
        return load_tabular_csv(path)
    if fmt == "svmlight":
        return load_svmlight(path, n_features)
    raise FormatError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def write_svmlight(path, matrix, labels):
    m = sp.csr_matrix(matrix)
    with open(path, "w") as fh:
        for i in range(m.shape[0]):
            lo, hi = m.indptr[i], m.indptr[i + 1]
            lab = "?" if labels is None or labels[i] == 0 else \
                f"{int(labels[i]):+d}"
            feats = " ".join(f"{int(k)}:{float(v)!r}"
                             for k, v in zip(m.indices[lo:hi], m.data[lo:hi]))
            fh.write(f"{lab} {feats}\n".replace(" \n", "\n"))


# -- bags --------------------------------------------------------------------

def _selector_members(ds: Dataset, sel, tokens):
    if not isinstance(sel, dict) or not sel:
        raise FormatError(f"bad selector {sel!r}")
    keep = np.ones(len(ds), dtype=bool)
    for key, arg in sel.items():
        if key == "contains_token":
            if ds.kind != "text":
                raise FormatError("contains_token needs a text dataset")
            words = [arg] if isinstance(arg, str) else list(arg)
            for word in words:
                keep &= np.array([word in t for t in tokens])
        elif key == "column_equals":
            if ds.kind != "tabular":
                raise FormatError("column_equals needs a tabular dataset")
            for colname, value in arg.items():
                if ds.rows and colname not in ds.rows[0]:
                    raise FormatError(f"unknown column {colname!r}")
                keep &= np.array([r[colname] == str(value) for r in ds.rows])
        elif key == "index_list":
            idx = np.array([int(i) for i in arg], dtype=np.int64)
            if np.any((idx < 0) | (idx >= len(ds))):
                raise FormatError("index_list entries out of range")
            mask = np.zeros(len(ds), dtype=bool)
            mask[idx] = True
            keep &= mask
        else:
            raise FormatError(f"unknown selector {key!r}")
    return np.flatnonzero(keep).tolist()


def assemble_bags(ds: Dataset, specs) -> BagSet:
    """Evaluate bag specs against a dataset; overlaps are allowed."""
    tokens = [set(tokenize(t)) for t in ds.texts] if ds.kind == "text" else []
    bags = []
    for spec in specs:
        name = spec.get("name")
        if name is None:
            raise FormatError("every bag needs a name")
        if "indices" in spec:
            members = sorted(int(i) for i in spec["indices"])
            bad = [i for i in members if not 0 <= i < len(ds)]
            if bad:
                raise FormatError(f"bag {name!r}: indices out of range {bad[:5]}")
        elif "selector" in spec:
            members = _selector_members(ds, spec["selector"], tokens)
        else:
            raise FormatError(f"bag {name!r} needs 'selector' or 'indices'")
        if not members:
            raise FormatError(f"empty bag {name!r}")
        bags.append(Bag(name, members))
    return BagSet(bags)


def read_bag_specs(path):
    with open(path) as fh:
        doc = json.load(fh)
    if "bags" not in doc:
        raise FormatError(f"{path}: missing 'bags'")
    return doc["bags"]


def bag_words(specs):
    words = []
    for spec in specs:
        tok = spec.get("selector", {}).get("contains_token")
        if tok is not None:
            words += [tok] if isinstance(tok, str) else list(tok)
    return list(dict.fromkeys(words))


def constraints_from_dict(doc) -> ConstraintSet:
    bounds = [Bound(b["bag"], float(b.get("lower", 0.0)),
                    float(b.get("upper", 1.0))) for b in doc.get("bounds", [])]
    diffs = [Difference(d["upper_bag"], d["lower_bag"],
                        float(d.get("lower", 0.0)), float(d.get("upper", 1.0)))
             for d in doc.get("differences", [])]
    orders = [tuple(p) for p in doc.get("orderings", [])]
    return ConstraintSet(bounds, diffs, orders)


def constraints_to_dict(cons: ConstraintSet):
    return {"bounds": [{"bag": b.bag, "lower": b.lower, "upper": b.upper}
                       for b in cons.bounds],
            "differences": [{"upper_bag": d.upper_bag,
                             "lower_bag": d.lower_bag, "lower": d.lower,
                             "upper": d.upper} for d in cons.differences],
            "orderings": [list(p) for p in cons.extra_orderings]}


def read_constraints(path) -> ConstraintSet:
    with open(path) as fh:
        return constraints_from_dict(json.load(fh))


# -- featurization -----------------------------------------------------------

def fit_featurizer(ds: Dataset, remove_words=(), drop_columns=(), min_df=1):
    """Fit a feature map on ``ds``; returns ``(featurizer dict, features)``."""
    if ds.kind == "text":
        removed = set(remove_words)
        docs = [[t for t in tokenize(x) if t not in removed] for x in ds.texts]
        vocab = fit_vocabulary(docs, min_df)
        feat = vocab.to_dict()
        feat["remove_words"] = sorted(removed)
        return feat, append_bias(tfidf_matrix(docs, vocab))
    if ds.kind == "tabular":
        if not ds.rows:
            raise FormatError("empty tabular dataset")
        drop = set(drop_columns)
        cols = [c for c in ds.rows[0] if c not in drop]
        numeric, categorical = [], []
        for c in cols:
            try:
                [float(r[c]) for r in ds.rows]
                numeric.append(c)
            except ValueError:
                categorical.append(c)
        schema = fit_tabular(ds.rows, numeric, categorical)
        return schema.to_dict(), append_bias(encode_tabular(ds.rows, schema))
    feat = {"kind": "svmlight", "n_features": int(ds.matrix.shape[1])}
    return feat, append_bias(FeatureMatrix(ds.matrix))


def transform(ds: Dataset, feat) -> FeatureMatrix:
    kind = feat["kind"]
    if kind == "tfidf":
        if ds.kind != "text":
            raise FormatError("model expects text input")
        vocab = Vocabulary.from_dict(feat)
        removed = set(feat.get("remove_words", ()))
        docs = [[t for t in tokenize(x) if t not in removed] for x in ds.texts]
        return append_bias(tfidf_matrix(docs, vocab))
    if kind == "tabular":
        if ds.kind != "tabular":
            raise FormatError("model expects tabular input")
        return append_bias(encode_tabular(ds.rows,
                                          TabularSchema.from_dict(feat)))
    if kind == "svmlight":
        if ds.kind != "svmlight":
            raise FormatError("model expects svmlight input")
        m = ds.matrix
        n = feat["n_features"]
        if m.shape[1] > n:
            raise FormatError("input has more features than the model")
        m = sp.csr_matrix((m.data, m.indices, m.indptr), shape=(m.shape[0], n))
        return append_bias(FeatureMatrix(m))
    raise FormatError(f"unknown featurizer kind {kind!r}")


# -- models and predictions --------------------------------------------------

def model_to_dict(model: Model):
    return {"weights": [float(v) for v in model.weights],
            "bias_index": model.bias_index,
            "featurizer": model.featurizer,
            "hyperparams": model.hyperparams}


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_model(path, model: Model):
    write_json(path, model_to_dict(model))


def read_model(path) -> Model:
    with open(path) as fh:
        d = json.load(fh)
    return Model(np.array(d["weights"], dtype=np.float64), d["bias_index"],
                 d.get("featurizer"), d.get("hyperparams", {}))


def write_predictions(path, ids, margins):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "margin", "label"])
        for i, m in zip(ids, margins):
            w.writerow([i, repr(float(m)), 1 if m >= 0 else -1])


def read_predictions(path):
    header, records = _read_csv(path)
    if header[:3] != ["id", "margin", "label"]:
        raise FormatError(f"{path}: expected header id,margin,label")
    ids, margins, labels = [], [], []
    for line, row in records:
        try:
            ids.append(row[0])
            margins.append(float(row[1]))
            labels.append(int(row[2]))
        except (IndexError, ValueError):
            raise FormatError(f"{path}:{line}: malformed prediction row")
    return ids, np.array(margins), np.array(labels)


def top_features(model: Model, names, k):
    """``(positive, negative)`` lists of ``(name, weight)``, strongest first.

    Only strictly positive (negative) weights enter the positive (negative)
    list; the bias is excluded.
    """
    w = model.weights
    cols = [j for j in range(len(w)) if j != model.bias_index]
    if len(names) < len(cols):
        raise ValueError("fewer feature names than weights")
    pos = sorted((j for j in cols if w[j] > 0), key=lambda j: (-w[j], j))[:k]
    neg = sorted((j for j in cols if w[j] < 0), key=lambda j: (w[j], j))[:k]
    return ([(names[j], float(w[j])) for j in pos],
            [(names[j], float(w[j])) for j in neg])


def report_top_features(model: Model, vocab: Vocabulary, k):
    return top_features(model, vocab.tokens, k)


def feature_names(feat):
    kind = feat["kind"]
    if kind == "tfidf":
        return list(feat["tokens"])
    if kind == "tabular":
        return TabularSchema.from_dict(feat).feature_names()
    return [str(j) for j in range(feat["n_features"])]

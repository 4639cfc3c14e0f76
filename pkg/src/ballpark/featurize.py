"""Feature maps: TF-IDF for text, one-hot plus standardized numerics for
tables, and the constant bias column."""

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import FeatureMatrix

_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text):
    """Lowercase, split on non-alphanumeric runs, drop digits and 1-char tokens."""
    return [t for t in _SPLIT.split(text.lower())
            if len(t) > 1 and not t.isdigit()]


@dataclass
class Vocabulary:
    index: dict
    df: dict
    n_docs: int

    def __post_init__(self):
        self.idf = {t: math.log((1 + self.n_docs) / (1 + d)) + 1.0
                    for t, d in self.df.items()}
        self.tokens = sorted(self.index, key=self.index.get)
        self._idf_array = np.array([self.idf[t] for t in self.tokens])

    def __len__(self):
        return len(self.index)

    def to_dict(self):
        return {"kind": "tfidf", "tokens": self.tokens,
                "df": [self.df[t] for t in self.tokens],
                "n_docs": self.n_docs}

    @classmethod
    def from_dict(cls, d):
        tokens = d["tokens"]
        return cls({t: i for i, t in enumerate(tokens)},
                   dict(zip(tokens, d["df"])), d["n_docs"])


def fit_vocabulary(corpus, min_df=1):
    """Fit a vocabulary over token streams; columns in first-appearance order."""
    if len(corpus) == 0:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df = Counter()
    order = {}
    for doc in corpus:
        for t in dict.fromkeys(doc):
            df[t] += 1
            order.setdefault(t, len(order))
    kept = [t for t in sorted(order, key=order.get) if df[t] >= min_df]
    return Vocabulary({t: i for i, t in enumerate(kept)},
                      {t: df[t] for t in kept}, len(corpus))


def transform_tfidf(doc, vocab):
    """One L2-normalized TF-IDF row as ``(indices, values)``."""
    counts = Counter(t for t in doc if t in vocab.index)
    if not counts:
        return np.zeros(0, dtype=np.intp), np.zeros(0)
    idx = np.array(sorted(vocab.index[t] for t in counts), dtype=np.intp)
    tokens = [vocab.tokens[i] for i in idx]
    vals = np.array([counts[t] for t in tokens], dtype=np.float64)
    vals *= vocab._idf_array[idx]
    vals /= np.sqrt(np.dot(vals, vals))
    return idx, vals


def tfidf_matrix(docs, vocab):
    """Stack TF-IDF rows for many token streams (no bias column)."""
    indptr = [0]
    indices = []
    data = []
    for doc in docs:
        idx, vals = transform_tfidf(doc, vocab)
        indices.append(idx)
        data.append(vals)
        indptr.append(indptr[-1] + len(idx))
    m = sp.csr_matrix(
        (np.concatenate(data) if data else np.zeros(0),
         np.concatenate(indices) if indices else np.zeros(0, dtype=np.intp),
         np.array(indptr)),
        shape=(len(docs), len(vocab)))
    return FeatureMatrix(m)


@dataclass
class TabularSchema:
    numeric: list
    means: list
    stds: list
    categorical: list
    categories: dict

    @property
    def dim(self):
        return len(self.numeric) + sum(len(self.categories[c])
                                       for c in self.categorical)

    def feature_names(self):
        names = list(self.numeric)
        for c in self.categorical:
            names += [f"{c}={v}" for v in self.categories[c]]
        return names

    def to_dict(self):
        return {"kind": "tabular", "numeric": self.numeric,
                "means": self.means, "stds": self.stds,
                "categorical": self.categorical,
                "categories": {c: list(v) for c, v in self.categories.items()}}

    @classmethod
    def from_dict(cls, d):
        return cls(d["numeric"], d["means"], d["stds"], d["categorical"],
                   {c: list(v) for c, v in d["categories"].items()})


def fit_tabular(rows, numeric, categorical):
    """Fit standardization statistics and category offsets on dict rows."""
    if len(set(numeric) | set(categorical)) != len(numeric) + len(categorical):
        raise ValueError("column names must be unique")
    means, stds = [], []
    for col in numeric:
        x = np.array([float(r[col]) for r in rows])
        means.append(float(x.mean()))
        s = float(x.std())
        stds.append(s if s > 0 else 1.0)
    cats = {c: sorted({str(r[c]) for r in rows}) for c in categorical}
    return TabularSchema(list(numeric), means, stds, list(categorical), cats)


def encode_tabular(rows, schema):
    """Encode dict rows under ``schema`` (no bias column)."""
    out = np.zeros((len(rows), schema.dim))
    offsets = {}
    pos = len(schema.numeric)
    for c in schema.categorical:
        offsets[c] = {v: pos + j for j, v in enumerate(schema.categories[c])}
        pos += len(schema.categories[c])
    for i, r in enumerate(rows):
        for j, col in enumerate(schema.numeric):
            out[i, j] = (float(r[col]) - schema.means[j]) / schema.stds[j]
        for c in schema.categorical:
            v = str(r[c])
            if v not in offsets[c]:
                raise ValueError(f"unseen category {v!r} in column {c!r}")
            out[i, offsets[c][v]] = 1.0
    return FeatureMatrix(sp.csr_matrix(out))


def append_bias(m):
    """Append a constant 1.0 column and mark it as the bias."""
    if m.has_bias:
        raise ValueError("matrix already has a bias column")
    ones = sp.csr_matrix(np.ones((m.n_rows, 1)))
    return FeatureMatrix(sp.hstack([m.matrix, ones], format="csr"),
                         bias_index=m.n_cols)

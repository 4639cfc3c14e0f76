"""Experiment machinery: metrics, the high-vs-low baseline, synthetic bags,
constraint builders from true proportions, and the sensitivity scan."""

import csv
import itertools
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .alternator import fit_ballpark
from .core import (Bag, BagSet, Bound, ConstraintSet, Difference,
                   FeatureMatrix, Hyperparams, LabeledSet, bag_proportion)
from .label_lp import check_feasibility
from .svm import Model, class_weighted_costs, predict, train_svm
from .tuner import DEFAULT_GRID


def _check_pair(preds, labels):
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError("predictions and labels differ in length")
    if preds.size == 0:
        raise ValueError("empty input")
    return preds, labels


def accuracy(preds, labels):
    preds, labels = _check_pair(preds, labels)
    return float(np.mean(preds == labels))


def macro_f1(preds, labels):
    """Mean of per-class F1 over {+1, -1}; an undefined F1 counts as 0."""
    preds, labels = _check_pair(preds, labels)
    scores = []
    for cls in (1, -1):
        tp = np.count_nonzero((preds == cls) & (labels == cls))
        fp = np.count_nonzero((preds == cls) & (labels != cls))
        fn = np.count_nonzero((preds != cls) & (labels == cls))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom and tp else 0.0)
    return float(np.mean(scores))


def stratified_folds(labels, n_folds, seed):
    """Deterministic stratified K-fold index lists."""
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    folds = [[] for _ in range(n_folds)]
    offset = 0
    for cls in (1, -1):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        for j, i in enumerate(idx):
            folds[(offset + j) % n_folds].append(int(i))
        offset += len(idx)
    return [np.array(sorted(f), dtype=np.intp) for f in folds]


def _union(bags):
    return sorted(set(i for b in bags for i in b.members))


def high_vs_low(features: FeatureMatrix, high, low, grid=DEFAULT_GRID,
                folds=10, seed=0, tol=1e-4) -> Model:
    """Class-weighted SVM treating high bags as positive, low bags negative.

    C is picked by K-fold accuracy on those noisy labels (ties toward the
    smaller C); the returned model is refit on every high/low instance.
    """
    hi, lo = set(_union(high)), set(_union(low))
    both = hi & lo
    if both:
        warnings.warn(f"dropping {len(both)} instances found in both the high "
                      "and the low set", stacklevel=2)
        hi -= both
        lo -= both
    if not hi or not lo:
        raise ValueError("high and low sets must both be non-empty")
    rows = np.array(sorted(hi) + sorted(lo), dtype=np.intp)
    labels = np.array([1.0] * len(hi) + [-1.0] * len(lo))
    X = features.take(rows)
    parts = stratified_folds(labels, folds, seed)
    best_c, best_acc = None, -1.0
    for C in sorted(float(c) for c in grid):
        accs = []
        for f, test in enumerate(parts):
            train = np.setdiff1d(np.arange(len(rows)), test)
            m = train_svm(X.take(train), labels[train],
                          class_weighted_costs(labels[train], C), tol=tol,
                          seed=seed + f)
            accs.append(accuracy(predict(m, X.take(test)), labels[test]))
        acc = float(np.mean(accs))
        if acc > best_acc + 1e-12:
            best_c, best_acc = C, acc
    model = train_svm(X, labels, class_weighted_costs(labels, best_c),
                      tol=tol, seed=seed)
    model.hyperparams = {"C": best_c, "cv_accuracy": best_acc}
    return model


@dataclass
class SyntheticConfig:
    n_features: int = 20
    n_informative: int = 1
    class_sep: float = 1.0
    bag_sizes: tuple = (500, 500, 500)
    proportions: tuple = (0.4, 0.3, 0.2)
    seed: int = 0
    pool: int = None  # points per class to draw bags from; None = just enough

    def __post_init__(self):
        if not 0 < self.n_informative <= self.n_features:
            raise ValueError("need 0 < n_informative <= n_features")
        if len(self.bag_sizes) != len(self.proportions):
            raise ValueError("one proportion per bag")
        if any(not 0 <= p <= 1 for p in self.proportions):
            raise ValueError("proportions must lie in [0, 1]")


def sample_classes(labels, cfg: SyntheticConfig, rng):
    """Gaussian points: informative dims centred at +/-class_sep."""
    labels = np.asarray(labels)
    X = rng.standard_normal((len(labels), cfg.n_features))
    X[:, :cfg.n_informative] += cfg.class_sep * labels[:, None]
    return X


def make_synthetic_bags(cfg: SyntheticConfig):
    """Disjoint bags hitting ``floor(p_k |B_k|)`` positives each.

    Returns ``(features with bias, labels, BagSet)``.
    """
    rng = np.random.default_rng(cfg.seed)
    n_pos = [int(np.floor(p * s)) for p, s in zip(cfg.proportions,
                                                  cfg.bag_sizes)]
    n_neg = [s - k for s, k in zip(cfg.bag_sizes, n_pos)]
    pool_pos = cfg.pool if cfg.pool is not None else sum(n_pos)
    pool_neg = cfg.pool if cfg.pool is not None else sum(n_neg)
    if sum(n_pos) > pool_pos or sum(n_neg) > pool_neg:
        raise ValueError("not enough generated points of each class to fill "
                         "the bags")
    labels_pool = np.array([1] * pool_pos + [-1] * pool_neg)
    X_pool = sample_classes(labels_pool, cfg, rng)
    pos = list(rng.permutation(pool_pos))
    neg = list(pool_pos + rng.permutation(pool_neg))
    rows, bags = [], []
    for k, (a, b) in enumerate(zip(n_pos, n_neg)):
        take = [pos.pop() for _ in range(a)] + [neg.pop() for _ in range(b)]
        bags.append(Bag(f"B{k + 1}", range(len(rows), len(rows) + len(take))))
        rows += take
    rows = np.array(rows, dtype=np.intp)
    X = np.hstack([X_pool[rows], np.ones((len(rows), 1))])
    return (FeatureMatrix.from_dense(X, bias_index=cfg.n_features),
            labels_pool[rows], BagSet(bags))


def make_synthetic_test(cfg: SyntheticConfig, n, seed=None):
    """Balanced held-out sample from the same generator."""
    rng = np.random.default_rng([cfg.seed, 1] if seed is None else seed)
    labels = np.where(np.arange(n) % 2 == 0, 1, -1)
    X = np.hstack([sample_classes(labels, cfg, rng), np.ones((n, 1))])
    return FeatureMatrix.from_dense(X, bias_index=cfg.n_features), labels


@dataclass
class SensitivityConfig:
    u_m: float = 1.0
    l_p: float = 0.5
    l_d: float = 1.33
    proportions: dict = field(default_factory=dict)  # bag name -> true p

    def __post_init__(self):
        if self.u_m <= 0 or self.l_p < 0 or self.l_d < 0:
            raise ValueError("factors must be positive (l_p, l_d may be 0)")


def factor_constraints(cfg: SensitivityConfig, lower_bounds=True,
                       upper_bound=True) -> ConstraintSet:
    """Constraints from true proportions and multiplicative factors.

    The first bag of maximal proportion gets the upper bound ``p * u_m``;
    every bag gets the lower bound ``p * l_p``; every ordered pair with
    ``p1 >= p2`` gets the difference lower bound ``l_d * (p1 - p2)``. All
    values are clipped into [0, 1]; vacuous bounds are omitted.
    """
    props = cfg.proportions
    names = list(props)
    top = max(names, key=lambda n: props[n]) if names else None
    bounds = []
    for n in names:
        lo = float(np.clip(cfg.l_p * props[n], 0, 1)) if lower_bounds else 0.0
        hi = 1.0
        if upper_bound and n == top:
            hi = float(np.clip(cfg.u_m * props[n], 0, 1))
        if lo > 0 or hi < 1:
            bounds.append(Bound(n, lo, hi))
    diffs = []
    for a, b in itertools.permutations(names, 2):
        if props[a] >= props[b]:
            diffs.append(Difference(
                a, b, float(np.clip(cfg.l_d * (props[a] - props[b]), 0, 1)),
                1.0))
    return ConstraintSet(bounds, diffs)


def true_proportions(labels, bags: BagSet):
    return {b.name: bag_proportion(labels, b) for b in bags}


@dataclass
class ScanRow:
    factor: str
    value: float
    accuracy: float
    status: str


def sensitivity_scan(features: FeatureMatrix, bags: BagSet,
                     proportions: dict, valid_features: FeatureMatrix,
                     valid_labels, factor: str, values, hp: Hyperparams,
                     base: SensitivityConfig = None):
    """Vary one factor (``u_m``, ``l_p`` or ``l_d``) with the others fixed."""
    if factor not in ("u_m", "l_p", "l_d"):
        raise ValueError(f"unknown factor {factor!r}")
    base = base or SensitivityConfig()
    base = replace(base, proportions=dict(proportions))
    rows = []
    for v in values:
        cfg = replace(base, **{factor: float(v)})
        cons = factor_constraints(cfg)
        ok, _ = check_feasibility(bags, cons)
        if not ok:
            rows.append(ScanRow(factor, float(v), float("nan"), "infeasible"))
            continue
        model, _, trace = fit_ballpark(features, bags, cons, LabeledSet(), hp)
        acc = accuracy(predict(model, valid_features), valid_labels)
        rows.append(ScanRow(factor, float(v), acc, trace.status))
    return rows


def write_scan_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["factor", "value", "accuracy", "status"])
        for r in rows:
            w.writerow([r.factor, repr(r.value),
                        "" if np.isnan(r.accuracy) else repr(r.accuracy),
                        r.status])

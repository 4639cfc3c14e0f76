"""Label-free cross-validation for C: split every bag, fit on the training
sub-bags, score how badly held-out sub-bags break the proportion bounds."""

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .alternator import fit_ballpark
from .core import (Bag, BagSet, ConstraintSet, FeatureMatrix, Hyperparams,
                   LabeledSet)
from .svm import predict

DEFAULT_GRID = tuple(10.0 ** k for k in range(-4, 5))


@dataclass
class CvPlan:
    n_folds: int
    seed: int
    heldout: dict  # bag name -> list (one per fold) of held-out member tuples
    members: dict  # bag name -> full member tuple
    small_bags: tuple = ()

    def fold(self, f):
        """``(training sub-bags, held-out sub-bags)`` for fold ``f``."""
        train, held = [], []
        for name, members in self.members.items():
            out = set(self.heldout[name][f])
            train.append(Bag(name, [i for i in members if i not in out]))
            held.append(Bag(name, self.heldout[name][f]))
        return BagSet(train), BagSet(held)


def split_bags(bags: BagSet, n_folds=10, seed=0) -> CvPlan:
    """Partition each bag's members into ``n_folds`` near-equal random parts.

    Bags with fewer than ``n_folds`` members instead hold out a random
    ``floor(|B|/2)`` members independently in every fold.
    """
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    heldout, members, small = {}, {}, []
    for bag in bags:
        m = np.array(bag.members, dtype=np.int64)
        if len(m) < 2:
            raise ValueError(f"bag {bag.name!r} has fewer than 2 members; "
                             "it cannot be split")
        members[bag.name] = bag.members
        if len(m) >= n_folds:
            parts = np.array_split(rng.permutation(m), n_folds)
            heldout[bag.name] = [tuple(sorted(int(i) for i in p))
                                 for p in parts]
        else:
            small.append(bag.name)
            k = len(m) // 2
            heldout[bag.name] = [
                tuple(sorted(int(i) for i in rng.choice(m, k, replace=False)))
                for _ in range(n_folds)]
    if small:
        warnings.warn(f"bags {small} have fewer than {n_folds} members; "
                      "splitting them in half per fold", stacklevel=2)
    return CvPlan(n_folds, seed, heldout, members, tuple(small))


def held_out_proportions(model, heldout: BagSet, features: FeatureMatrix):
    preds = predict(model, features)
    out = {}
    for bag in heldout:
        if len(bag) == 0:
            raise ValueError(f"held-out bag {bag.name!r} is empty")
        out[bag.name] = float(np.mean(preds[list(bag.members)] == 1))
    return out


def violation_from_proportions(p, cons: ConstraintSet,
                               include_differences=False):
    terms = []
    for b in cons.bounds:
        terms.append(max(p[b.bag] - b.upper, 0.0) + max(b.lower - p[b.bag], 0.0))
    if include_differences:
        for d in cons.differences:
            g = p[d.upper_bag] - p[d.lower_bag]
            terms.append(max(g - d.upper, 0.0) + max(d.lower - g, 0.0))
    return float(np.mean(terms)) if terms else 0.0


def violation_score(model, heldout: BagSet, cons: ConstraintSet,
                    features: FeatureMatrix, include_differences=False):
    """Mean bound deviation of held-out predicted proportions."""
    return violation_from_proportions(
        held_out_proportions(model, heldout, features), cons,
        include_differences)


@dataclass
class CvInputs:
    """Everything a fold fit needs; ``features`` rows are unlabeled first,
    then the labeled instances."""

    features: FeatureMatrix
    bags: BagSet
    cons: ConstraintSet
    labeled: LabeledSet = field(default_factory=LabeledSet)
    hp: Hyperparams = field(default_factory=Hyperparams)
    include_differences: bool = False


@dataclass
class GridResult:
    grid: list
    scores: list  # scores[c][fold], None where the cell was dropped
    mean_violation: list
    selected_C: float
    dropped: list = field(default_factory=list)  # (C, fold, certificate)

    def to_dict(self):
        return {"grid": list(self.grid), "scores": self.scores,
                "mean_violation": [None if np.isnan(v) else v
                                   for v in self.mean_violation],
                "selected_C": self.selected_C,
                "dropped": [{"C": c, "fold": f, "certificate": cert}
                            for c, f, cert in self.dropped]}


def fold_problem(inputs: CvInputs, train: BagSet):
    """Restrict features and bags to the rows a fold trains on.

    Training rows are unlabeled rows left in some training sub-bag, rows in
    no bag at all, and every labeled row. Returns the reindexed features,
    bags and labeled set.
    """
    n_lab = len(inputs.labeled)
    n_unl = inputs.features.n_rows - n_lab
    in_bag = np.zeros(n_unl, dtype=bool)
    in_train = np.zeros(n_unl, dtype=bool)
    for bag in inputs.bags:
        m = np.array([i for i in bag.members if i < n_unl], dtype=np.int64)
        in_bag[m] = True
    for bag in train:
        m = np.array([i for i in bag.members if i < n_unl], dtype=np.int64)
        in_train[m] = True
    keep = np.flatnonzero(in_train | ~in_bag)
    new_index = np.full(n_unl, -1, dtype=np.int64)
    new_index[keep] = np.arange(len(keep))

    def remap(i):
        return int(new_index[i]) if i < n_unl else len(keep) + (i - n_unl)

    bags = BagSet([Bag(b.name, [remap(i) for i in b.members]) for b in train])
    rows = np.concatenate([keep, np.arange(n_unl, n_unl + n_lab)])
    lab = LabeledSet([remap(i) for i in inputs.labeled.indices],
                     inputs.labeled.labels)
    return inputs.features.take(rows), bags, lab


def cell_seed(seed, c_index, fold):
    return int(np.random.SeedSequence([seed, c_index, fold])
               .generate_state(1)[0] & 0x7FFFFFFF)


def _run_cell(args):
    inputs, plan, C, c_index, f = args
    train, held = plan.fold(f)
    feats, bags, lab = fold_problem(inputs, train)
    hp = replace(inputs.hp, C=C, seed=cell_seed(inputs.hp.seed, c_index, f))
    model, _, trace = fit_ballpark(feats, bags, inputs.cons, lab, hp)
    if model is None:
        return None, trace.certificate
    return violation_score(model, held, inputs.cons, inputs.features,
                           inputs.include_differences), None


def select_C(grid, inputs: CvInputs, plan: CvPlan, n_jobs=1) -> GridResult:
    """Fit every (C, fold) cell and pick the C of least mean violation."""
    grid = [float(c) for c in grid]
    if not grid:
        raise ValueError("empty C grid")
    cells = [(inputs, plan, C, ci, f) for ci, C in enumerate(grid)
             for f in range(plan.n_folds)]
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    scores = [[None] * plan.n_folds for _ in grid]
    dropped = []
    for (_, _, C, ci, f), (score, cert) in zip(cells, results):
        if score is None:
            dropped.append((C, f, cert))
        else:
            scores[ci][f] = score
    means = [float(np.mean([s for s in row if s is not None]))
             if any(s is not None for s in row) else np.nan for row in scores]
    if all(np.isnan(m) for m in means):
        raise ValueError("every (C, fold) training problem is infeasible")
    best = min(m for m in means if not np.isnan(m))
    selected = min(C for C, m in zip(grid, means)
                   if not np.isnan(m) and m <= best + 1e-12)
    return GridResult(grid, scores, means, selected, dropped)

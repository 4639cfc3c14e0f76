"""Initial weights from the partial order between bag means."""

import numpy as np
import scipy.sparse as sp

from .core import FeatureMatrix
from .svm import Model, solve_svm


def bag_means(features: FeatureMatrix, bags) -> dict:
    """Dense feature-space mean of every bag, keyed by bag name."""
    means = {}
    for bag in bags:
        if len(bag) == 0:
            raise ValueError(f"bag {bag.name!r} is empty")
        rows = np.asarray(bag.members, dtype=np.intp)
        if rows.max() >= features.n_rows or rows.min() < 0:
            raise IndexError(f"bag {bag.name!r} references a missing row")
        means[bag.name] = np.asarray(
            features.matrix[rows].sum(axis=0)).ravel() / len(rows)
    return means


def init_problem(means, orderings, labeled=None):
    """Pseudo-instances, targets and costs for the ranking program.

    Each ordering ``(k1, k2)`` becomes the row ``mu[k1] - mu[k2]`` with
    target +1 and cost ``1/|P|``; ``labeled`` is ``(features, labels, C_L)``
    and contributes its rows at cost ``C_L / L``.
    """
    blocks, targets, costs = [], [], []
    if orderings:
        diffs = np.array([means[a] - means[b] for a, b in orderings])
        blocks.append(sp.csr_matrix(diffs))
        targets.append(np.ones(len(orderings)))
        costs.append(np.full(len(orderings), 1.0 / len(orderings)))
    if labeled is not None:
        feats, labels, c_l = labeled
        if feats.n_rows and c_l > 0:
            blocks.append(feats.matrix)
            targets.append(np.asarray(labels, dtype=np.float64))
            costs.append(np.full(feats.n_rows, c_l / feats.n_rows))
    if not blocks:
        raise ValueError("nothing to initialize from: no orderings and no "
                         "labeled instances")
    X = sp.vstack(blocks, format="csr")
    return X, np.concatenate(targets), np.concatenate(costs)


def solve_init(means, orderings, labeled=None, bias_index=None, tol=1e-6,
               seed=0) -> Model:
    """Weights ranking every ordered bag pair by mean margin (margin 1)."""
    X, t, c = init_problem(means, orderings, labeled)
    sol = solve_svm(X, t, c, tol=tol, max_passes=5000, seed=seed)
    return Model(sol.weights, bias_index)

"""L2-regularized hinge-loss linear classifiers via dual coordinate descent.

Every problem here has the form

    min_w  1/2 w'w + sum_i c_i max(0, 1 - t_i w'x_i)

with per-instance costs ``c_i >= 0`` and targets ``t_i``. Targets are
usually +/-1 labels; real targets in [-1, 1] are allowed so the same solver
handles relaxed labels (the loss is a hinge on the scaled row ``t_i x_i``).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from numba import njit

from .core import FeatureMatrix, sign


@dataclass
class Model:
    weights: np.ndarray
    bias_index: Optional[int] = None
    featurizer: Optional[dict] = None
    hyperparams: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("model weights must be finite")


@dataclass
class SvmSolution:
    weights: np.ndarray
    alpha: np.ndarray
    primal: float
    dual: float
    passes: int

    @property
    def gap(self):
        return (self.primal - self.dual) / max(abs(self.primal), 1e-300)


@njit(cache=True)
def _gap(indptr, indices, data, t, c, w, alpha):
    ww = 0.0
    for f in range(w.shape[0]):
        ww += w[f] * w[f]
    loss = 0.0
    asum = 0.0
    for i in range(t.shape[0]):
        asum += alpha[i]
        if c[i] <= 0.0:
            continue
        m = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            m += w[indices[k]] * data[k]
        h = 1.0 - t[i] * m
        if h > 0.0:
            loss += c[i] * h
    return 0.5 * ww + loss, asum - 0.5 * ww


@njit(cache=True)
def _dcd(indptr, indices, data, t, c, w, alpha, tol, max_passes, seed):
    """Dual coordinate descent with shrinking.

    Sweeps stop once the projected-gradient spread on the active set falls
    below ``eps``; then the full set is restored and the duality gap is
    checked, tightening ``eps`` until the relative gap is at most ``tol``.
    """
    n = t.shape[0]
    qii = np.zeros(n)
    for i in range(n):
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += data[k] * data[k]
        qii[i] = s * t[i] * t[i]
    np.random.seed(seed)
    index = np.arange(n)
    active = n
    eps = 0.1
    pg_max_old = np.inf
    pg_min_old = -np.inf
    passes = 0
    primal = 0.0
    dual = 0.0
    while passes < max_passes:
        passes += 1
        pg_max = -np.inf
        pg_min = np.inf
        np.random.shuffle(index[:active])
        s = 0
        while s < active:
            i = index[s]
            ci = c[i]
            if ci <= 0.0:
                s += 1
                continue
            if qii[i] <= 0.0:
                # the loss on this row is the constant c_i; alpha_i = c_i
                alpha[i] = ci
                s += 1
                continue
            m = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                m += w[indices[k]] * data[k]
            g = t[i] * m - 1.0
            a = alpha[i]
            pg = 0.0
            if a <= 0.0:
                if g > pg_max_old:
                    active -= 1
                    index[s] = index[active]
                    index[active] = i
                    continue
                if g < 0.0:
                    pg = g
            elif a >= ci:
                if g < pg_min_old:
                    active -= 1
                    index[s] = index[active]
                    index[active] = i
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if abs(pg) > 1e-14:
                na = min(max(a - g / qii[i], 0.0), ci)
                d = (na - a) * t[i]
                if d != 0.0:
                    for k in range(indptr[i], indptr[i + 1]):
                        w[indices[k]] += d * data[k]
                alpha[i] = na
            s += 1
        if pg_max - pg_min <= eps or active == 0:
            if active < n:
                active = n
                pg_max_old = np.inf
                pg_min_old = -np.inf
                continue
            primal, dual = _gap(indptr, indices, data, t, c, w, alpha)
            if primal - dual <= tol * max(abs(primal), 1e-300):
                return passes, primal, dual
            eps *= 0.1
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    primal, dual = _gap(indptr, indices, data, t, c, w, alpha)
    return passes, primal, dual


def _primal_qp(X, t, c):
    """Interior-point solve of the primal over ``(w, xi)``; small ``d`` only."""
    import cvxopt
    n, d = X.shape
    tx = sp.diags(t) @ X
    P = cvxopt.spdiag([1.0] * d + [0.0] * n)
    q = cvxopt.matrix(np.concatenate([np.zeros(d), c]))
    G = sp.vstack([sp.hstack([sp.csr_matrix((n, d)), -sp.eye(n)]),
                   sp.hstack([-tx, -sp.eye(n)])]).tocoo()
    Gm = cvxopt.spmatrix(G.data.tolist(), G.row.tolist(), G.col.tolist(),
                         size=G.shape)
    h = cvxopt.matrix(np.concatenate([np.zeros(n), -np.ones(n)]))
    opts = {"show_progress": False, "abstol": 1e-10, "reltol": 1e-9,
            "feastol": 1e-10, "maxiters": 200}
    res = cvxopt.solvers.qp(P, q, Gm, h, options=opts)
    w = np.array(res["x"]).ravel()[:d]
    alpha = np.clip(np.array(res["z"]).ravel()[n:], 0.0, c)
    return w, alpha


def solve_svm(features, targets, costs, tol=1e-4, max_passes=1000, seed=0,
              alpha0=None, qp_fallback_dim=64):
    """Solve the weighted hinge-loss problem; returns primal and dual state.

    ``alpha0`` warm-starts the dual variables (clipped into ``[0, c_i]``).
    Coordinate descent crawls on badly conditioned low-dimensional data
    (many duplicated dense rows, large costs); when it exhausts
    ``max_passes`` above ``tol`` and there are at most ``qp_fallback_dim``
    columns, the primal is re-solved with an interior-point QP.
    """
    X = features.matrix if isinstance(features, FeatureMatrix) else features
    t = np.ascontiguousarray(targets, dtype=np.float64)
    c = np.ascontiguousarray(costs, dtype=np.float64)
    n = X.shape[0]
    if t.shape != (n,) or c.shape != (n,):
        raise ValueError("targets and costs must have one entry per row")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise ValueError("costs must be finite and nonnegative")
    if not np.any(c > 0):
        raise ValueError("all costs are zero; nothing to train")
    if alpha0 is None:
        alpha = np.zeros(n)
    else:
        alpha = np.clip(np.asarray(alpha0, dtype=np.float64), 0.0, c).copy()
    w = np.asarray(X.T @ (alpha * t)).ravel().astype(np.float64)
    passes, primal, dual = _dcd(X.indptr.astype(np.int64),
                                X.indices.astype(np.int64),
                                X.data.astype(np.float64), t, c, w, alpha,
                                float(tol), int(max_passes), int(seed))
    sol = SvmSolution(w, alpha, primal, dual, passes)
    if sol.gap > tol and X.shape[1] <= qp_fallback_dim:
        w2, a2 = _primal_qp(X, t, c)
        # the QP's own dual is only approximately feasible; rebuild w-side
        # quantities so the reported gap is self-consistent
        p2 = primal_objective(w2, X, t, c)
        wa = np.asarray(X.T @ (a2 * t)).ravel()
        d2 = float(a2.sum()) - 0.5 * float(wa @ wa)
        if p2 < sol.primal:
            sol = SvmSolution(w2, a2, p2, max(d2, sol.dual), passes)
    return sol


def primal_objective(weights, features, targets, costs):
    X = features.matrix if isinstance(features, FeatureMatrix) else features
    m = X @ weights
    h = np.maximum(0.0, 1.0 - np.asarray(targets) * m)
    return 0.5 * float(weights @ weights) + float(np.dot(costs, h))


def train_svm(features: FeatureMatrix, labels, costs, tol=1e-4,
              max_passes=1000, seed=0) -> Model:
    sol = solve_svm(features, labels, costs, tol, max_passes, seed)
    return Model(sol.weights, features.bias_index)


def decision_values(model: Model, features: FeatureMatrix):
    """Margins ``w'x`` per row."""
    if features.n_cols != model.weights.shape[0]:
        raise ValueError(f"dimension mismatch: model has "
                         f"{model.weights.shape[0]} weights, features have "
                         f"{features.n_cols} columns")
    return np.asarray(features.matrix @ model.weights).ravel()


def predict(model: Model, features: FeatureMatrix):
    return sign(decision_values(model, features))


def class_weighted_costs(labels, base_cost):
    """Inverse-class-frequency costs ``base * n / (2 n_class)``."""
    labels = np.asarray(labels)
    n_pos = np.count_nonzero(labels == 1)
    n_neg = np.count_nonzero(labels == -1)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("class weighting needs both classes present")
    n = len(labels)
    return np.where(labels == 1, base_cost * n / (2 * n_pos),
                    base_cost * n / (2 * n_neg))

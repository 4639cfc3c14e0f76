"""Alternating minimization of the joint objective over weights and relaxed
labels: initialize from bag orderings, then repeat label step / weight step
until the relative weight change settles."""

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (BagSet, ConstraintSet, FeatureMatrix, Hyperparams,
                   LabeledSet, derive_orderings, estimated_proportion, sign,
                   validate)
from .init_rank import bag_means, solve_init
from .label_lp import build_problem, check_feasibility, solve_label_step
from .svm import Model, solve_svm


@dataclass
class IterationRecord:
    iteration: int
    objective: float  # after the weight step
    objective_after_y: float  # after the label step, before the weight step
    weight_change: float
    proportions: dict
    lp_status: str
    saturated: float  # fraction of |y_i| > 0.99
    rejected_steps: int = 0


@dataclass
class TrainTrace:
    records: list = field(default_factory=list)
    status: str = "running"  # converged | max_iters | infeasible
    certificate: list = field(default_factory=list)
    initial_objective: float = np.nan

    @property
    def objectives(self):
        return [r.objective for r in self.records]

    def half_steps(self):
        """Objective after every half-step, in order."""
        out = []
        for r in self.records:
            out += [r.objective_after_y, r.objective]
        return out

    def to_dict(self):
        keys = ["objective", "objective_after_y", "weight_change", "lp_status",
                "saturated", "rejected_steps"]
        d = {"status": self.status, "certificate": list(self.certificate),
             "iterations": len(self.records)}
        for k in keys:
            d[k] = [getattr(r, k) for r in self.records]
        d["proportions"] = [r.proportions for r in self.records]
        return d


def _split(features: FeatureMatrix, labeled: LabeledSet):
    n_lab = len(labeled)
    n_unl = features.n_rows - n_lab
    if n_unl < 0:
        raise ValueError("more labeled instances than feature rows")
    if sorted(labeled.indices) != list(range(n_unl, features.n_rows)):
        raise ValueError("labeled instances must occupy the last rows of the "
                         "feature matrix")
    order = np.argsort(labeled.indices)
    lab_labels = np.asarray(labeled.labels, dtype=np.float64)[order]
    return n_unl, lab_labels


def objective_value(w, y, features: FeatureMatrix, bags=None, cons=None,
                    hp: Hyperparams = None, labeled: LabeledSet = None):
    """Joint objective with labeled slacks at their optimum (the hinge).

    ``y`` covers the unlabeled rows; ``bags`` and ``cons`` are accepted for
    signature symmetry and do not enter the value.
    """
    hp = hp or Hyperparams()
    labeled = labeled if labeled is not None else LabeledSet()
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if features.n_cols != w.shape[0]:
        raise ValueError("weight dimension does not match features")
    n_unl, lab_labels = _split(features, labeled)
    if y.shape != (n_unl,):
        raise ValueError(f"y must have {n_unl} entries, got {y.shape}")
    if np.any(np.abs(y) > 1.0 + 1e-9):
        raise ValueError("y leaves the box [-1, 1]")
    m = np.asarray(features.matrix @ w).ravel()
    val = 0.5 * float(w @ w)
    if n_unl and hp.C:
        val += hp.C / n_unl * float(np.maximum(0.0, 1.0 - y * m[:n_unl]).sum())
    if len(lab_labels) and hp.C_L:
        val += hp.C_L / len(lab_labels) * float(
            np.maximum(0.0, 1.0 - lab_labels * m[n_unl:]).sum())
    return val


def _weight_step(X, targets, costs, hp, alpha0):
    """Weighted hinge SVM; zero total cost means the regularizer alone (w=0)."""
    if not np.any(costs > 0):
        return np.zeros(X.shape[1]), np.zeros(len(costs))
    sol = solve_svm(X, targets, costs, tol=hp.svm_tol, max_passes=2000,
                    seed=hp.seed, alpha0=alpha0)
    return sol.weights, sol.alpha


def _relative_change(w_new, w_old):
    den = float(w_old @ w_old)
    num = float((w_new - w_old) @ (w_new - w_old))
    if den == 0.0:
        return 0.0 if float(w_new @ w_new) == 0.0 else np.inf
    return num / den


def fit_ballpark(features: FeatureMatrix, bags: BagSet, cons: ConstraintSet,
                 labeled: LabeledSet = None, hp: Hyperparams = None):
    """Fit weights and relaxed labels under the bag constraints.

    Returns ``(model, y, trace)``. When the hard constraints are infeasible,
    ``model`` and ``y`` are ``None`` and ``trace.status == "infeasible"``
    with the conflicting constraints in ``trace.certificate``.
    """
    hp = hp or Hyperparams()
    labeled = labeled if labeled is not None else LabeledSet()
    n_unl, lab_labels = _split(features, labeled)
    problems = validate(bags, cons, n_unl, len(labeled))
    if problems:
        raise ValueError("invalid inputs: " + "; ".join(problems))
    trace = TrainTrace()
    if hp.soft_penalty is None:
        ok, cert = check_feasibility(bags, cons, labeled, n_unl)
        if not ok:
            trace.status = "infeasible"
            trace.certificate = cert
            return None, None, trace

    X = features.matrix
    n_lab = len(lab_labels)
    costs = np.concatenate([np.full(n_unl, hp.C / n_unl if n_unl else 0.0),
                            np.full(n_lab, hp.C_L / n_lab if n_lab else 0.0)])
    lab_init = None
    if n_lab:
        lab_init = (features.take(np.arange(n_unl, features.n_rows)),
                    lab_labels, hp.C_L)
    orderings = derive_orderings(cons)
    means = bag_means(features, [bags[a] for a in
                                 dict.fromkeys(x for p in orderings
                                               for x in p)])
    w = solve_init(means, orderings, lab_init, features.bias_index,
                   seed=hp.seed).weights
    trace.initial_objective = objective_value(
        w, np.zeros(n_unl), features, hp=hp, labeled=labeled)

    constrained = [bags[name] for name in cons.bag_names()]
    exact = hp.descent_mode == "exact"
    y = None
    alpha = None
    for it in range(1, hp.max_outer_iters + 1):
        margins = np.asarray(X[:n_unl] @ w).ravel()
        problem = build_problem(margins, bags, cons, labeled, n_unl,
                                hp.soft_penalty)
        sol = solve_label_step(problem, hp.lp_feas_tol)
        if sol.status != "optimal":
            trace.status = "infeasible"
            trace.certificate = sol.certificate
            return None, None, trace
        rejected = 0
        f_y = objective_value(w, sol.y, features, hp=hp, labeled=labeled)
        if exact and y is not None:
            f_prev = objective_value(w, y, features, hp=hp, labeled=labeled)
            if f_y > f_prev:
                rejected += 1
                f_y = f_prev
            else:
                y = sol.y
        else:
            y = sol.y

        targets = np.concatenate([y if exact else sign(y).astype(np.float64),
                                  lab_labels])
        w_new, alpha_new = _weight_step(X, targets, costs, hp, alpha)
        f_w = objective_value(w_new, y, features, hp=hp, labeled=labeled)
        if exact and f_w > f_y:
            rejected += 1
            w_new, f_w = w, f_y
        else:
            alpha = alpha_new

        change = _relative_change(w_new, w)
        w = w_new
        trace.records.append(IterationRecord(
            iteration=it, objective=f_w, objective_after_y=f_y,
            weight_change=change,
            proportions={b.name: estimated_proportion(y, labeled, b)
                         for b in constrained},
            lp_status=sol.status,
            saturated=float(np.mean(np.abs(y) > 0.99)) if n_unl else 1.0,
            rejected_steps=rejected))
        if change <= hp.rel_tol:
            trace.status = "converged"
            break
    else:
        trace.status = "max_iters"

    model = Model(w, features.bias_index, hyperparams=asdict(hp))
    return model, y, trace

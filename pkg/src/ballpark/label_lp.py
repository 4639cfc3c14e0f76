"""The label step: relaxed labels minimizing the mean hinge under proportion
constraints, solved exactly as a linear program.

Each constrained label ``y_i`` is written as ``-1 + sum of segment
variables``, one segment per linear piece of ``max(0, 1 - m_i y)`` on
``[-1, 1]``. The hinge is convex, so segment slopes increase and the LP
recovers the hinge exactly without slack rows. Rows are the proportion
and difference constraints only; each carries an activity variable whose
bounds are the constraint interval.
"""

from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .core import BagSet, ConstraintSet, LabeledSet, sign


@dataclass
class ConstraintRow:
    """``lower <= coef . y[members] + offset <= upper`` for one constraint."""

    name: str
    members: np.ndarray
    coef: np.ndarray
    offset: float
    lower: float
    upper: float


@dataclass
class LabelLpProblem:
    margins: np.ndarray
    rows: list
    soft_penalty: float = None

    @property
    def n(self):
        return len(self.margins)

    def constrained(self):
        if not self.rows:
            return np.zeros(0, dtype=np.intp)
        return np.unique(np.concatenate([r.members for r in self.rows]))


@dataclass
class LabelLpSolution:
    status: str  # "optimal" | "infeasible"
    y: np.ndarray = None
    objective: float = np.nan
    certificate: list = field(default_factory=list)
    violations: dict = field(default_factory=dict)


def _bag_terms(bag, n_unlabeled, fixed):
    members = np.asarray(bag.members, dtype=np.intp)
    unl = members[members < n_unlabeled]
    lab = members[members >= n_unlabeled]
    fixed_sum = 0.0
    for i in lab:
        if int(i) not in fixed:
            raise IndexError(f"bag {bag.name!r} member {int(i)} is neither "
                             "unlabeled nor labeled")
        fixed_sum += fixed[int(i)]
    size = len(members)
    # p = sum(y_unl) / 2|B| + fixed_sum / 2|B| + 1/2
    return unl, 1.0 / (2 * size), fixed_sum / (2 * size) + 0.5


def constraint_rows(bags: BagSet, cons: ConstraintSet, labeled: LabeledSet,
                    n_unlabeled: int):
    """Express every bound and difference as a linear row over ``y``."""
    fixed = labeled.as_dict()
    terms = {}

    def bag_terms(name):
        if name not in terms:
            terms[name] = _bag_terms(bags[name], n_unlabeled, fixed)
        return terms[name]

    rows = []
    for b in cons.bounds:
        unl, a, off = bag_terms(b.bag)
        rows.append(ConstraintRow(f"bound[{b.bag}]", unl,
                                  np.full(len(unl), a), off,
                                  b.lower, b.upper))
    for d in cons.differences:
        u1, a1, o1 = bag_terms(d.upper_bag)
        u2, a2, o2 = bag_terms(d.lower_bag)
        coef = {}
        for i in u1:
            coef[int(i)] = coef.get(int(i), 0.0) + a1
        for i in u2:
            coef[int(i)] = coef.get(int(i), 0.0) - a2
        members = np.array(sorted(coef), dtype=np.intp)
        rows.append(ConstraintRow(
            f"difference[{d.upper_bag}-{d.lower_bag}]", members,
            np.array([coef[int(i)] for i in members]), o1 - o2,
            d.lower, d.upper))
    return rows


def build_problem(margins, bags, cons, labeled, n_unlabeled=None,
                  soft_penalty=None) -> LabelLpProblem:
    margins = np.asarray(margins, dtype=np.float64)
    if n_unlabeled is None:
        n_unlabeled = len(margins)
    if not np.all(np.isfinite(margins)):
        raise ValueError("margins must be finite")
    rows = constraint_rows(bags, cons, labeled, n_unlabeled)
    return LabelLpProblem(margins, rows, soft_penalty)


def hinge(y, margins):
    return np.maximum(0.0, 1.0 - np.asarray(y) * np.asarray(margins))


def _segments(m):
    """Breakpoints and slopes of max(0, 1 - m y) on [-1, 1]."""
    if m > 1.0:
        bp = 1.0 / m
        return [(bp + 1.0, -m), (1.0 - bp, 0.0)]
    if m < -1.0:
        bp = 1.0 / m
        return [(bp + 1.0, 0.0), (1.0 - bp, -m)]
    return [(2.0, -m)]


def _sides(rows, soft):
    """(row index, lower, upper, violation sign) for every LP row."""
    if soft is None:
        return [(r, row.lower, row.upper, 0.0) for r, row in enumerate(rows)]
    sides = []
    for r, row in enumerate(rows):
        # activities live in [-1, 1]; +/-2 keeps the open side finite
        sides.append((r, row.lower, 2.0, 1.0))
        sides.append((r, -2.0, row.upper, -1.0))
    return sides


def _assemble(problem, idx, rows, soft):
    """Columns: segment variables, one activity per side, soft violations.

    Row ``s`` reads ``coef . z + sign * v_s - act_s = sum(coef) - offset`` so
    that ``act_s = g(y) + sign * v_s`` with ``g`` the constraint value.
    """
    pos = {int(i): k for k, i in enumerate(idx)}
    seg_owner, seg_len, seg_cost = [], [], []
    for k, i in enumerate(idx):
        for length, slope in _segments(problem.margins[i]):
            seg_owner.append(k)
            seg_len.append(length)
            seg_cost.append(slope / problem.n)
    seg_owner = np.array(seg_owner, dtype=np.intp)
    n_seg = len(seg_owner)
    sides = _sides(rows, soft)
    n_sides = len(sides)
    n_soft = n_sides if soft is not None else 0
    n_cols = n_seg + n_sides + n_soft
    A = np.zeros((n_sides, n_cols))
    b = np.zeros(n_sides)
    lo = np.zeros(n_cols)
    hi = np.zeros(n_cols)
    c = np.zeros(n_cols)
    hi[:n_seg] = seg_len
    c[:n_seg] = seg_cost
    dense = np.zeros((len(rows), len(idx)))
    for r, row in enumerate(rows):
        for i, a in zip(row.members, row.coef):
            dense[r, pos[int(i)]] += a
    for s, (r, lower, upper, vsign) in enumerate(sides):
        A[s, :n_seg] = dense[r, seg_owner]
        b[s] = dense[r].sum() - rows[r].offset
        A[s, n_seg + s] = -1.0
        lo[n_seg + s] = lower
        hi[n_seg + s] = upper
        if soft is not None:
            v = n_seg + n_sides + s
            A[s, v] = vsign
            hi[v] = np.inf
            c[v] = soft
    return A, b, lo, hi, c, seg_owner, n_seg


def _start_point(A, b, lo, hi, c, n_seg):
    """Segments at their unconstrained optimum; activities nearest to it."""
    x = np.where(c < 0, hi, lo)
    x[n_seg:] = lo[n_seg:]
    n_sides = A.shape[0]
    act = A[:, :n_seg] @ x[:n_seg] - b
    acts = slice(n_seg, n_seg + n_sides)
    x[acts] = np.clip(act, lo[acts], hi[acts])
    return x


def _violations(rows, vals):
    return {row.name: (max(row.lower - g, 0.0), max(g - row.upper, 0.0))
            for row, g in zip(rows, vals)}


def row_values(rows, y):
    return np.array([float(r.coef @ y[r.members]) + r.offset for r in rows])


def _phase1_feasible(problem, idx, rows):
    if any(r.lower > r.upper for r in rows):
        return False
    A, b, lo, hi, c, _, n_seg = _assemble(problem, idx, rows, None)
    res = simplex.solve(np.zeros_like(c), A, b, lo, hi,
                        x_start=_start_point(A, b, lo, hi, c, n_seg))
    return res.status == "optimal"


def _certificate(problem, idx, rows, duals=None):
    """Deletion filter over rows: an irreducible infeasible subset."""
    empty = [r for r in rows if r.lower > r.upper]
    if empty:
        return [empty[0].name]
    keep = list(range(len(rows)))
    if duals is not None:
        support = [k for k in keep if abs(duals[k]) > 1e-10]
        if support and not _phase1_feasible(
                problem, idx, [rows[k] for k in support]):
            keep = support
    for k in list(keep):
        trial = [j for j in keep if j != k]
        if not _phase1_feasible(problem, idx, [rows[j] for j in trial]):
            keep = trial
    return [rows[k].name for k in keep]


def solve_label_step(problem: LabelLpProblem, lp_feas_tol=1e-8):
    """Minimize mean hinge over ``y in [-1, 1]^N`` under the row constraints."""
    m = problem.margins
    y = sign(m).astype(np.float64)
    idx = problem.constrained()
    rows = problem.rows
    soft = problem.soft_penalty
    if soft is None and any(r.lower > r.upper for r in rows):
        return LabelLpSolution("infeasible",
                               certificate=_certificate(problem, idx, rows))
    if len(idx):
        A, b, lo, hi, c, owner, n_seg = _assemble(problem, idx, rows, soft)
        res = simplex.solve(c, A, b, lo, hi,
                            x_start=_start_point(A, b, lo, hi, c, n_seg))
        if res.status == "infeasible":
            return LabelLpSolution(
                "infeasible",
                certificate=_certificate(problem, idx, rows, res.duals))
        if res.status != "optimal":
            raise RuntimeError(f"label LP ended with status {res.status}")
        yc = -1.0 + np.bincount(owner, weights=res.x[:n_seg],
                                minlength=len(idx))
        y[idx] = np.clip(yc, -1.0, 1.0)
    vals = row_values(rows, y)
    objective = float(hinge(y, m).mean()) if len(m) else 0.0
    violations = {}
    if soft is not None:
        violations = _violations(rows, vals)
    else:
        for row, g in zip(rows, vals):
            if g < row.lower - lp_feas_tol or g > row.upper + lp_feas_tol:
                raise RuntimeError(f"label LP solution violates {row.name} "
                                   f"({g} not in [{row.lower}, {row.upper}])")
    return LabelLpSolution("optimal", y, objective, violations=violations)


def check_feasibility(bags, cons, labeled=None, n_unlabeled=None):
    """Phase-1 check of the proportion polytope; independent of margins.

    Returns ``(True, [])`` or ``(False, certificate)``.
    """
    labeled = labeled if labeled is not None else LabeledSet()
    if n_unlabeled is None:
        n_unlabeled = 1 + max((max(b.members) for b in bags), default=-1)
        if len(labeled):
            n_unlabeled = min(n_unlabeled, min(labeled.indices))
    problem = build_problem(np.zeros(n_unlabeled), bags, cons, labeled,
                            n_unlabeled)
    idx = problem.constrained()
    rows = problem.rows
    if _phase1_feasible(problem, idx, rows):
        return True, []
    return False, _certificate(problem, idx, rows)


def soften(problem: LabelLpProblem, penalty: float) -> LabelLpProblem:
    """Copy of ``problem`` whose constraints carry violation slacks."""
    if penalty <= 0:
        raise ValueError("soft penalty must be positive")
    return LabelLpProblem(problem.margins, problem.rows, float(penalty))

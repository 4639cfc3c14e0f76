"""Two-phase dense simplex for bounded-variable linear programs.

Solves ``min c'x  s.t.  A x = b,  lo <= x <= hi`` where every ``lo`` is
finite and ``hi`` may be ``+inf``. Nonbasic variables sit at one of their
bounds, so box constraints never become rows. Pricing follows Bland's rule
(smallest eligible index enters, smallest index leaves on ratio ties), which
rules out cycling.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray
    objective: float
    duals: np.ndarray
    infeasibility: float
    iterations: int


class _State:
    def __init__(self, A, b, lo, hi, x, basis):
        self.A = A
        self.b = b
        self.lo = lo
        self.hi = hi
        self.x = x
        self.basis = np.array(basis, dtype=np.intp)
        self.is_basic = np.zeros(A.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        xn = np.where(self.is_basic, 0.0, self.x)
        self.x[self.basis] = self.Binv @ (self.b - self.A @ xn)


def _iterate(st, c, tol, max_iter, refactor_every=64):
    A, lo, hi, x = st.A, st.lo, st.hi, st.x
    movable = hi > lo
    it = 0
    while it < max_iter:
        if it and it % refactor_every == 0:
            st.refactor()
        it += 1
        pi = c[st.basis] @ st.Binv
        d = c - pi @ A
        at_upper = np.isfinite(hi) & (x >= hi)
        eligible = (~st.is_basic) & movable & (
            ((~at_upper) & (d < -tol)) | (at_upper & (d > tol)))
        cand = np.flatnonzero(eligible)
        if cand.size == 0:
            return "optimal", it
        j = cand[0]
        direction = -1.0 if at_upper[j] else 1.0
        col = st.Binv @ A[:, j]
        rate = -direction * col  # d x_B / d theta
        xb = x[st.basis]
        lob = lo[st.basis]
        hib = hi[st.basis]
        theta = hi[j] - lo[j]
        leave = -1
        leave_to_upper = False
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = rate < -1e-11
            inc = rate > 1e-11
            lim = np.full(rate.shape, np.inf)
            lim[dec] = (xb[dec] - lob[dec]) / -rate[dec]
            lim[inc] = (hib[inc] - xb[inc]) / rate[inc]
        lim = np.maximum(lim, 0.0)
        if lim.size:
            best = lim.min()
            if best < theta:
                ties = np.flatnonzero(lim <= best + 1e-12)
                p = ties[np.argmin(st.basis[ties])]
                theta = lim[p]
                leave = p
                leave_to_upper = bool(inc[p])
        if not np.isfinite(theta):
            return "unbounded", it
        x[st.basis] = xb + theta * rate
        if leave < 0:
            x[j] = hi[j] if direction > 0 else lo[j]
            continue
        out = st.basis[leave]
        x[j] = x[j] + direction * theta
        x[out] = hi[out] if leave_to_upper else lo[out]
        piv = col[leave]
        row = st.Binv[leave] / piv
        st.Binv -= np.outer(col, row)
        st.Binv[leave] = row
        st.basis[leave] = j
        st.is_basic[out] = False
        st.is_basic[j] = True
    return "iteration_limit", it


def solve(c, A, b, lo, hi, x_start=None, tol=1e-9, max_iter=None):
    """Solve a bounded-variable LP with a phase-1 / phase-2 simplex.

    ``x_start`` chooses where each structural variable starts; values are
    snapped to the nearest bound. Returned ``duals`` are the phase-1 row
    multipliers when infeasible (a Farkas certificate) and the phase-2 row
    prices otherwise.
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    m, n = A.shape
    if np.any(~np.isfinite(lo)):
        raise ValueError("lower bounds must be finite")
    if np.any(hi < lo):
        raise ValueError("variable with empty bound interval")
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    if x_start is None:
        x0 = lo.copy()
    else:
        xs = np.asarray(x_start, dtype=np.float64)
        to_hi = np.isfinite(hi) & (np.abs(xs - hi) < np.abs(xs - lo))
        x0 = np.where(to_hi, hi, lo)
    if m == 0:
        # no rows: every variable moves to its cheaper bound
        if np.any((c < 0) & ~np.isfinite(hi)):
            return LpResult("unbounded", x0, -np.inf, np.zeros(0), 0.0, 0)
        x = np.where(c < 0, hi, lo)
        return LpResult("optimal", x, float(c @ x), np.zeros(0), 0.0, 0)

    resid = b - A @ x0
    s = np.where(resid >= 0, 1.0, -1.0)
    A_full = np.hstack([A, np.diag(s)])
    lo_full = np.concatenate([lo, np.zeros(m)])
    hi_full = np.concatenate([hi, np.full(m, np.inf)])
    x_full = np.concatenate([x0, np.abs(resid)])
    st = _State(A_full, b, lo_full, hi_full, x_full, np.arange(n, n + m))

    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    status, it1 = _iterate(st, c1, tol, max_iter)
    st.refactor()
    infeas = float(np.sum(np.abs(st.x[n:])))
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    if status == "iteration_limit":
        return LpResult(status, st.x[:n].copy(), np.nan, np.zeros(m),
                        infeas, it1)
    if infeas > 1e-9 * scale:
        duals = c1[st.basis] @ st.Binv
        return LpResult("infeasible", st.x[:n].copy(), np.nan, duals,
                        infeas, it1)

    # artificials are pinned at zero for phase 2
    st.hi[n:] = 0.0
    st.x[n:] = np.minimum(np.maximum(st.x[n:], 0.0), 0.0)
    st.refactor()
    c2 = np.concatenate([c, np.zeros(m)])
    status, it2 = _iterate(st, c2, tol, max_iter)
    st.refactor()
    x = np.minimum(np.maximum(st.x[:n], lo), hi)
    duals = c2[st.basis] @ st.Binv
    return LpResult(status, x, float(c @ x), duals,
                    float(np.sum(np.abs(st.x[n:]))), it1 + it2)

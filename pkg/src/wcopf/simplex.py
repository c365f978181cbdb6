"""Bounded-variable primal simplex for small dense LPs.

Solves

    maximize    c @ x
    subject to  a_eq @ x == b_eq
                a_ub @ x <= b_ub
                lo <= x <= hi        (entries may be -inf / +inf)

with a two-phase method: phase 1 minimizes the sum of artificial
variables (no big-M constants), phase 2 optimizes the user objective.
Nonbasic variables rest at one of their finite bounds; bound flips are
pivots that change no basis column.  All ties break toward the lowest
variable index, so repeated solves of the same problem are bit
identical.  After 1000 consecutive degenerate pivots the entering rule
switches to Bland's rule, which guarantees termination.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalBreakdown
from .tolerances import DEFAULT_TOL, Tolerances

# nonbasic/basic status codes
_BASIC = 0
_AT_LO = 1
_AT_UP = 2
_FREE = 3

_BLAND_TRIGGER = 1000


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """Dense LP data.  Missing constraint blocks may be passed as None."""

    c: np.ndarray
    a_eq: np.ndarray = None
    b_eq: np.ndarray = None
    a_ub: np.ndarray = None
    b_ub: np.ndarray = None
    lo: np.ndarray = None
    hi: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        if self.a_eq is None:
            self.a_eq = np.zeros((0, n))
            self.b_eq = np.zeros(0)
        if self.a_ub is None:
            self.a_ub = np.zeros((0, n))
            self.b_ub = np.zeros(0)
        self.a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        self.a_ub = np.asarray(self.a_ub, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        self.b_ub = np.asarray(self.b_ub, dtype=float).reshape(-1)
        if self.lo is None:
            self.lo = np.full(n, -np.inf)
        if self.hi is None:
            self.hi = np.full(n, np.inf)
        self.lo = np.asarray(self.lo, dtype=float).reshape(-1)
        self.hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if self.b_eq.shape[0] != self.a_eq.shape[0] or self.b_ub.shape[0] != self.a_ub.shape[0]:
            raise ValueError("constraint matrix / rhs shape mismatch")
        if self.lo.shape[0] != n or self.hi.shape[0] != n:
            raise ValueError("bound vectors must match the number of variables")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bound exceeds upper bound")
        for arr in (self.c, self.a_eq, self.a_ub, self.b_eq, self.b_ub):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValueError("nonfinite entries in LP data")


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray = None
    objective_value: float = float("nan")
    iteration_count: int = 0


def solve_lp(problem: LpProblem, tol: Tolerances = DEFAULT_TOL) -> LpSolution:
    """Solve an LpProblem; returns a deterministic LpSolution."""
    n = problem.c.shape[0]
    m_eq = problem.a_eq.shape[0]
    m_ub = problem.a_ub.shape[0]
    m = m_eq + m_ub

    if m == 0:
        return _solve_bounds_only(problem, tol)

    # standardize: append a slack per <= row, all rows become equalities
    n_sl = m_ub
    a = np.zeros((m, n + n_sl))
    a[:m_eq, :n] = problem.a_eq
    a[m_eq:, :n] = problem.a_ub
    a[m_eq:, n:] = np.eye(n_sl)
    b = np.concatenate([problem.b_eq, problem.b_ub])
    lo = np.concatenate([problem.lo, np.zeros(n_sl)])
    hi = np.concatenate([problem.hi, np.full(n_sl, np.inf)])

    core = _Core(a, b, lo, hi, tol)
    feasible = core.phase1()
    if not feasible:
        return LpSolution(LpStatus.INFEASIBLE, iteration_count=core.iterations)
    c_full = np.zeros(core.n_total)
    c_full[:n] = problem.c
    bounded = core.phase2(c_full)
    if not bounded:
        return LpSolution(LpStatus.UNBOUNDED, iteration_count=core.iterations)
    x = core.final_values()[:n]
    return LpSolution(LpStatus.OPTIMAL, x=x, objective_value=float(problem.c @ x),
                      iteration_count=core.iterations)


def _solve_bounds_only(problem, tol):
    """No constraint rows: each variable sits at its favorable bound."""
    c, lo, hi = problem.c, problem.lo, problem.hi
    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    for j in range(c.shape[0]):
        if c[j] > tol.objective:
            if not np.isfinite(hi[j]):
                return LpSolution(LpStatus.UNBOUNDED)
            x[j] = hi[j]
        elif c[j] < -tol.objective:
            if not np.isfinite(lo[j]):
                return LpSolution(LpStatus.UNBOUNDED)
            x[j] = lo[j]
    return LpSolution(LpStatus.OPTIMAL, x=x, objective_value=float(c @ x), iteration_count=0)


class _Core:
    """Tableau-based bounded-variable simplex over equality rows a z = b."""

    def __init__(self, a, b, lo, hi, tol):
        m, n_real = a.shape
        self.m = m
        self.n_real = n_real
        self.n_total = n_real + m  # artificials appended
        self.tol = tol
        self.iterations = 0
        self.max_iterations = 50 * (self.n_total + m)

        # start every real variable at a finite bound (lower preferred)
        x = np.zeros(self.n_total)
        stat = np.full(self.n_total, _FREE, dtype=np.int8)
        for j in range(n_real):
            if np.isfinite(lo[j]):
                x[j] = lo[j]
                stat[j] = _AT_LO
            elif np.isfinite(hi[j]):
                x[j] = hi[j]
                stat[j] = _AT_UP

        resid = b - a @ x[:n_real]
        sign = np.where(resid >= 0.0, 1.0, -1.0)

        self.a = np.hstack([a, np.diag(sign)])
        self.b = b
        self.lo = np.concatenate([lo, np.zeros(m)])
        self.hi = np.concatenate([hi, np.full(m, np.inf)])
        x[n_real:] = np.abs(resid)
        stat[n_real:] = _BASIC
        self.x = x
        self.stat = stat
        self.basis = np.arange(n_real, self.n_total)
        # initial tableau Binv @ a with Binv = diag(sign)
        self.t = self.a * sign[:, None]

    # -- main pivoting loop ------------------------------------------------

    def _run(self, c):
        tol = self.tol
        bland = False
        stalled = 0
        while True:
            self.iterations += 1
            if self.iterations > self.max_iterations:
                raise NumericalBreakdown(
                    f"simplex iteration cap {self.max_iterations} exceeded")
            d = c - c[self.basis] @ self.t
            movable = self.hi > self.lo
            can_inc = movable & ((self.stat == _AT_LO) | (self.stat == _FREE)) & (d > tol.objective)
            can_dec = movable & ((self.stat == _AT_UP) | (self.stat == _FREE)) & (d < -tol.objective)
            if not (can_inc.any() or can_dec.any()):
                return True  # optimal for this phase
            if bland:
                j = int(np.flatnonzero(can_inc | can_dec)[0])
            else:
                score = np.where(can_inc, d, 0.0) + np.where(can_dec, -d, 0.0)
                j = int(np.argmax(score))
            sigma = 1.0 if can_inc[j] else -1.0

            u = self.t[:, j]
            delta = -sigma * u  # basic variable rate of change per unit step
            xb = self.x[self.basis]
            lo_b = self.lo[self.basis]
            hi_b = self.hi[self.basis]

            adelta = np.abs(delta)
            pos = delta > tol.pivot
            neg = delta < -tol.pivot
            lim = pos | neg
            room = np.full(self.m, np.inf)
            room[pos] = np.maximum(hi_b[pos] - xb[pos], 0.0)
            room[neg] = np.maximum(xb[neg] - lo_b[neg], 0.0)
            t_arr = np.full(self.m, np.inf)
            t_arr[lim] = room[lim] / adelta[lim]

            t_flip = np.inf
            if np.isfinite(self.lo[j]) and np.isfinite(self.hi[j]):
                t_flip = self.hi[j] - self.lo[j]

            t_min = t_arr.min() if self.m else np.inf
            if not (np.isfinite(t_flip) or np.isfinite(t_min)):
                return False  # unbounded direction

            r = -1
            t_step = np.inf
            if np.isfinite(t_min):
                if bland:
                    ties = np.flatnonzero(t_arr == t_min)
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    # Harris two-pass ratio test: allow tol.feas of bound
                    # slack when shortlisting leaving rows, then take the
                    # largest pivot so near-zero elements never enter the
                    # basis.  Any overshoot of another row's bound is at
                    # most tol.feas by the definition of theta.
                    theta = np.min((room[lim] + tol.feas) / adelta[lim])
                    cand = np.flatnonzero(lim & (t_arr <= theta))
                    r = int(cand[np.argmax(adelta[cand])])
                t_step = t_arr[r]

            if t_flip <= t_step:
                # bound flip: no basis change
                self.x[self.basis] = xb + delta * t_flip
                if sigma > 0:
                    self.x[j] = self.hi[j]
                    self.stat[j] = _AT_UP
                else:
                    self.x[j] = self.lo[j]
                    self.stat[j] = _AT_LO
                gain = abs(d[j]) * t_flip
            else:
                leaving = self.basis[r]
                self.x[self.basis] = xb + delta * t_step
                if delta[r] > 0:
                    self.x[leaving] = self.hi[leaving]
                    self.stat[leaving] = _AT_UP
                else:
                    self.x[leaving] = self.lo[leaving]
                    self.stat[leaving] = _AT_LO
                self.x[j] = self.x[j] + sigma * t_step
                self.stat[j] = _BASIC
                self.basis[r] = j
                self._pivot(r, j)
                gain = abs(d[j]) * t_step

            if gain <= tol.objective:
                stalled += 1
                if stalled >= _BLAND_TRIGGER:
                    bland = True
            else:
                stalled = 0

    def _pivot(self, r, j):
        t = self.t
        piv = t[r, j]
        t[r] = t[r] / piv
        col = t[:, j].copy()
        col[r] = 0.0
        t -= np.outer(col, t[r])
        # keep the entering column numerically exact
        t[:, j] = 0.0
        t[r, j] = 1.0

    # -- phases ------------------------------------------------------------

    def phase1(self):
        c = np.zeros(self.n_total)
        c[self.n_real:] = -1.0
        self._run(c)  # bounded by construction
        infeas = self.x[self.n_real:].sum()
        if infeas > self.tol.feas:
            return False
        self._drive_out_artificials()
        # pin artificials at zero for phase 2
        self.lo[self.n_real:] = 0.0
        self.hi[self.n_real:] = 0.0
        nb_art = (self.stat[self.n_real:] != _BASIC)
        self.stat[self.n_real:][nb_art] = _AT_LO
        self.x[self.n_real:] = np.where(self.stat[self.n_real:] == _BASIC,
                                        self.x[self.n_real:], 0.0)
        return True

    def _drive_out_artificials(self):
        """Pivot basic artificials (all at zero) onto real columns where possible."""
        for r in range(self.m):
            v = self.basis[r]
            if v < self.n_real:
                continue
            row = self.t[r, :self.n_real]
            cand = np.flatnonzero((np.abs(row) > 1e-9) & (self.stat[:self.n_real] != _BASIC))
            if cand.size == 0:
                continue  # redundant row; artificial stays basic at zero
            j = int(cand[0])
            self.stat[v] = _AT_LO
            self.x[v] = 0.0
            self.stat[j] = _BASIC
            self.basis[r] = j
            self._pivot(r, j)

    def phase2(self, c):
        return self._run(c)

    # -- solution extraction -------------------------------------------------

    def final_values(self):
        """Recompute basic values exactly from the current basis."""
        nonbasic = np.ones(self.n_total, dtype=bool)
        nonbasic[self.basis] = False
        rhs = self.b - self.a[:, nonbasic] @ self.x[nonbasic]
        bmat = self.a[:, self.basis]
        try:
            xb = np.linalg.solve(bmat, rhs)
            self.x[self.basis] = xb
        except np.linalg.LinAlgError:
            pass  # keep tableau-propagated values
        resid = np.abs(self.a @ self.x - self.b)
        scale = 1.0 + np.abs(self.b)
        if np.any(resid > 1e-6 * scale):
            raise NumericalBreakdown("solution fails feasibility recheck")
        return self.x

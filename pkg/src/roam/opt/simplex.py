"""Bounded-variable revised simplex.

Every row gets a slack column so the working system is [A I] z = b with
bounds on all columns.  Phase 1 minimizes the sum of bound violations of
the basic variables starting from any basis, so the same loop handles cold
starts (slack basis) and warm starts (a basis from an earlier solve after
bounds or costs changed).  When a warm basis is still dual feasible, as
after tightening bounds in branch and bound, a dual simplex pass restores
primal feasibility first; the primal loop then only confirms optimality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .model import LPModel, Solution, SolveStatus

FEAS_TOL = 1e-7
COST_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 48
DEGENERATE_SWITCH = 40
DUAL_MAX_ITER = 2000

AT_LOWER, AT_UPPER, AT_ZERO, BASIC = 0, 1, 2, 3


@dataclass
class WarmStart:
    basis: np.ndarray
    status: np.ndarray  # per column: AT_LOWER / AT_UPPER / AT_ZERO / BASIC


class _Factor:
    """LU of the basis plus product-form updates."""

    def __init__(self, B):
        self.lu = splu(sp.csc_matrix(B))
        self.etas = []

    def ftran(self, a):
        z = self.lu.solve(a)
        for r, w in self.etas:
            zr = z[r] / w[r]
            z -= w * zr
            z[r] = zr
        return z

    def btran(self, c):
        y = np.array(c, dtype=float)
        for r, w in reversed(self.etas):
            yr = y[r]
            y[r] = (yr - (w @ y - w[r] * yr)) / w[r]
        return self.lu.solve(y, trans="T")

    def update(self, r, w):
        self.etas.append((r, w.copy()))


class SimplexSolver:
    def __init__(self, model: LPModel, max_iter=None):
        self.model = model
        A = model.matrix()
        self.m, self.n = A.shape
        m, n = self.m, self.n
        self.A = sp.hstack([A, sp.identity(m, format="csc")], format="csc")
        self.AT = self.A.T.tocsr()
        self.N = n + m
        sign = 1.0 if model.sense == "min" else -1.0
        self.sign = sign
        self.c = np.concatenate([sign * np.asarray(model.obj, dtype=float), np.zeros(m)])
        self.b = np.asarray(model.rhs, dtype=float)
        lb = np.concatenate([np.asarray(model.lb, dtype=float), np.zeros(m)])
        ub = np.concatenate([np.asarray(model.ub, dtype=float), np.zeros(m)])
        for r, s in enumerate(model.row_sense):
            if s == "<=":
                ub[n + r] = math.inf
            elif s == ">=":
                lb[n + r] = -math.inf
        self.lb, self.ub = lb, ub
        scale = max(1.0, float(np.max(np.abs(self.c), initial=0.0)))
        self.cost_tol = COST_TOL * scale
        self.max_iter = max(5000, 50 * (m + n)) if max_iter is None else max_iter
        self.iterations = 0

    # -- basis handling -------------------------------------------------
    def _column(self, j):
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        col = np.zeros(self.m)
        col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return col

    def _nonbasic_value(self, j, st):
        lo, hi = self.lb[j], self.ub[j]
        if st == AT_UPPER and math.isfinite(hi):
            return hi
        if st == AT_LOWER and math.isfinite(lo):
            return lo
        if math.isfinite(lo):
            return lo
        if math.isfinite(hi):
            return hi
        return 0.0

    def _set_start(self, warm):
        m, n = self.m, self.n
        status = np.full(self.N, AT_LOWER, dtype=np.int8)
        if warm is not None and len(warm.status) == self.N:
            basis = np.array(warm.basis, dtype=int)
            status[:] = warm.status
        else:
            basis = np.arange(n, n + m)
            status[basis] = BASIC
        self.basis = basis
        self.status = status
        x = np.zeros(self.N)
        for j in np.flatnonzero(status != BASIC):
            x[j] = self._nonbasic_value(j, status[j])
        self.x = x
        if not self._refactor():
            self._slack_restart()

    def _slack_restart(self):
        m, n = self.m, self.n
        for j in self.basis:
            self.status[j] = AT_LOWER
            self.x[j] = self._nonbasic_value(j, AT_LOWER)
        self.basis = np.arange(n, n + m)
        self.status[self.basis] = BASIC
        ok = self._refactor()
        assert ok

    def _refactor(self):
        try:
            self.factor = _Factor(self.A[:, self.basis])
        except RuntimeError:
            return False
        xb_free = self.x.copy()
        xb_free[self.basis] = 0.0
        rhs = self.b - self.A @ xb_free
        self.x[self.basis] = self.factor.lu.solve(rhs)
        return True

    # -- main loop --------------------------------------------------------
    def run(self, warm=None) -> Solution:
        self._set_start(warm)
        if warm is not None and self._dual_pass():
            return self._result(SolveStatus.INFEASIBLE)
        degenerate = 0
        since_refactor = 0
        checks = 0
        while True:
            if self.iterations >= self.max_iter:
                return self._result(SolveStatus.ITERATION_LIMIT)
            if since_refactor >= REFACTOR_EVERY:
                if not self._refactor():
                    self._slack_restart()
                since_refactor = 0

            xb = self.x[self.basis]
            lbb, ubb = self.lb[self.basis], self.ub[self.basis]
            below = xb < lbb - FEAS_TOL
            above = xb > ubb + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = above.astype(float) - below.astype(float)
                y = self.factor.btran(cb)
                d = -(self.AT @ y)
                d[self.basis] = 0.0
                tol = COST_TOL
            else:
                y = self.factor.btran(self.c[self.basis])
                d = self.c - self.AT @ y
                d[self.basis] = 0.0
                tol = self.cost_tol

            q = self._price(d, tol, bland=degenerate >= DEGENERATE_SWITCH)
            if q < 0:
                # confirm with fresh factors before declaring the outcome
                if since_refactor > 0 and checks < 3:
                    checks += 1
                    if not self._refactor():
                        self._slack_restart()
                    since_refactor = 0
                    continue
                if phase1:
                    return self._result(SolveStatus.INFEASIBLE)
                self.y = y
                return self._result(SolveStatus.OPTIMAL)

            direction = 1.0 if d[q] < 0 else -1.0
            w = self.factor.ftran(self._column(q))
            step, leave, bound_hit = self._ratio(w, direction, phase1)
            span = self.ub[q] - self.lb[q]
            flip = math.isfinite(span) and (leave < 0 or span <= step)
            if flip:
                step = span
            if leave < 0 and not flip:
                if phase1:
                    # phase 1 cannot be unbounded; refactor and retry
                    if not self._refactor():
                        self._slack_restart()
                    since_refactor = 0
                    checks += 1
                    if checks > 10:
                        return self._result(SolveStatus.ITERATION_LIMIT)
                    continue
                return self._result(SolveStatus.UNBOUNDED)

            self.iterations += 1
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            self.x[q] += direction * step
            self.x[self.basis] -= direction * step * w
            if flip:
                self.status[q] = AT_UPPER if direction > 0 else AT_LOWER
                self.x[q] = self.ub[q] if direction > 0 else self.lb[q]
                continue
            out = self.basis[leave]
            self.x[out] = bound_hit
            at_upper = bound_hit == self.ub[out] and bound_hit != self.lb[out]
            self.status[out] = AT_UPPER if at_upper else AT_LOWER
            self.basis[leave] = q
            self.status[q] = BASIC
            self.factor.update(leave, w)
            since_refactor += 1

    def _dual_pass(self) -> bool:
        """Dual simplex from a dual feasible basis; gives up quietly otherwise.

        Returns True when some row is proven unable to reach its bounds.
        """
        limit = self.iterations + max(DUAL_MAX_ITER, 2 * self.m)
        since_refactor = 0
        while self.iterations < limit:
            if since_refactor >= REFACTOR_EVERY:
                if not self._refactor():
                    self._slack_restart()
                    return False
                since_refactor = 0
            xb = self.x[self.basis]
            lbb, ubb = self.lb[self.basis], self.ub[self.basis]
            viol = np.maximum(lbb - xb, xb - ubb)
            r = int(np.argmax(viol))
            if viol[r] <= FEAS_TOL:
                return False
            y = self.factor.btran(self.c[self.basis])
            d = self.c - self.AT @ y
            d[self.basis] = 0.0
            if self._price(d, self.cost_tol, bland=False) >= 0:
                return False  # not dual feasible; leave it to the primal loop
            e = np.zeros(self.m)
            e[r] = 1.0
            alpha = self.AT @ self.factor.btran(e)
            alpha[self.basis] = 0.0
            rises = xb[r] < lbb[r]
            bound = lbb[r] if rises else ubb[r]
            st, x = self.status, self.x
            can_up = (st != BASIC) & (x < self.ub - 1e-12)
            can_down = (st != BASIC) & (x > self.lb + 1e-12)
            if rises:
                ok = (can_up & (alpha < -PIVOT_TOL)) | (can_down & (alpha > PIVOT_TOL))
            else:
                ok = (can_up & (alpha > PIVOT_TOL)) | (can_down & (alpha < -PIVOT_TOL))
            cand = np.flatnonzero(ok)
            if cand.size == 0:
                return self._row_unreachable(r, alpha, rises, bound)
            mag = np.abs(alpha[cand])
            dd = np.abs(d[cand])
            limit_ratio = ((dd + self.cost_tol) / mag).min()
            pick = np.flatnonzero(dd / mag <= limit_ratio)
            q = int(cand[pick[np.argmax(mag[pick])]])
            w = self.factor.ftran(self._column(q))
            if abs(w[r]) <= PIVOT_TOL:
                if not self._refactor():
                    self._slack_restart()
                return False
            step = (xb[r] - bound) / w[r]
            self.iterations += 1
            self.x[q] += step
            self.x[self.basis] -= step * w
            out = self.basis[r]
            self.x[out] = bound
            self.status[out] = AT_LOWER if rises else AT_UPPER
            if self.lb[out] == self.ub[out]:
                self.status[out] = AT_LOWER
            self.basis[r] = q
            self.status[q] = BASIC
            self.factor.update(r, w)
            since_refactor += 1
        return False

    def _row_unreachable(self, r, alpha, rises, bound) -> bool:
        """Whether basic row r misses its bound even with every nonbasic pushed to its limit."""
        if not self._refactor():
            self._slack_restart()
            return False
        e = np.zeros(self.m)
        e[r] = 1.0
        alpha = self.AT @ self.factor.btran(e)
        alpha[self.basis] = 0.0
        x = self.x
        room_up = self.ub - x
        room_down = x - self.lb
        sign = -1.0 if rises else 1.0  # a move of x_j by t shifts x_r by -alpha_j * t
        toward = sign * alpha
        toward[self.basis] = 0.0
        # x_j rises when toward > 0, falls when toward < 0; entries below the
        # pivot tolerance count as zero, as in the ratio test
        room = np.where(toward > 0, room_up, room_down)
        mag = np.abs(toward)
        live = (mag > PIVOT_TOL) | ((mag > 0) & np.isfinite(room))
        if np.any(~np.isfinite(room[live])):
            return False
        reach = float(np.dot(mag[live], room[live]))
        gap = abs(self.x[self.basis[r]] - bound)
        return reach < gap - FEAS_TOL * max(1.0, abs(bound))

    def _price(self, d, tol, bland):
        st = self.status
        x = self.x
        can_up = (st != BASIC) & (x < self.ub - 1e-12)
        can_down = (st != BASIC) & (x > self.lb + 1e-12)
        good = (can_up & (d < -tol)) | (can_down & (d > tol))
        cand = np.flatnonzero(good)
        if cand.size == 0:
            return -1
        if bland:
            return int(cand[0])
        return int(cand[np.argmax(np.abs(d[cand]))])

    def _ratio(self, w, direction, phase1):
        """Harris two-pass ratio test.  Returns (step, row, bound value)."""
        delta = -direction * w
        xb = self.x[self.basis]
        lbb, ubb = self.lb[self.basis], self.ub[self.basis]
        big = np.abs(delta) > PIVOT_TOL
        dec = big & (delta < 0)
        inc = big & (delta > 0)
        target = np.full(self.m, np.nan)
        if phase1:
            below = xb < lbb - FEAS_TOL
            above = xb > ubb + FEAS_TOL
            ok = ~below & ~above
            target[dec & above] = ubb[dec & above]
            target[dec & ok] = lbb[dec & ok]
            target[inc & below] = lbb[inc & below]
            target[inc & ok] = ubb[inc & ok]
        else:
            target[dec] = lbb[dec]
            target[inc] = ubb[inc]
        rows = np.flatnonzero(np.isfinite(target))
        if rows.size == 0:
            return math.inf, -1, None
        dist = np.abs(xb[rows] - target[rows])
        # the slack allowed past each bound in the first pass
        relax = FEAS_TOL * np.maximum(1.0, np.abs(target[rows]))
        sign_ok = np.where(delta[rows] < 0, xb[rows] >= target[rows], xb[rows] <= target[rows])
        dist = np.where(sign_ok, dist, 0.0)
        mag = np.abs(delta[rows])
        loose = (dist + relax) / mag
        limit = loose.min()
        tight = dist / mag
        pick = np.flatnonzero(tight <= limit)
        best = pick[np.argmax(mag[pick])]
        r = rows[best]
        return max(float(tight[best]), 0.0), int(r), float(target[r])

    def _result(self, status):
        it = self.iterations
        warm = WarmStart(self.basis.copy(), self.status.copy())
        if status is not SolveStatus.OPTIMAL:
            return Solution(status, iterations=it, warm=warm)
        x = self.x[: self.n].copy()
        # snap tiny bound drift
        lo = np.asarray(self.model.lb)
        hi = np.asarray(self.model.ub)
        x = np.minimum(np.maximum(x, lo), hi)
        value = float(np.dot(self.model.obj, x))
        duals = self.sign * self.y
        return Solution(status, value, x, duals, iterations=it, warm=warm)


def simplex(model: LPModel, warm=None, max_iter=None) -> Solution:
    if model.num_rows == 0:
        return _no_rows(model)
    sol = SimplexSolver(model, max_iter).run(warm)
    if warm is not None and sol.status is SolveStatus.ITERATION_LIMIT:
        # a stale basis can stall phase 1; start over from the slack basis
        cold = SimplexSolver(model, max_iter).run(None)
        cold.iterations += sol.iterations
        return cold
    return sol


def _no_rows(model):
    x = np.zeros(model.num_vars)
    sign = 1.0 if model.sense == "min" else -1.0
    for j in range(model.num_vars):
        c = sign * model.obj[j]
        lo, hi = model.lb[j], model.ub[j]
        if c > 0:
            x[j] = lo
        elif c < 0:
            x[j] = hi
        else:
            x[j] = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)
        if not math.isfinite(x[j]):
            return Solution(SolveStatus.UNBOUNDED)
    return Solution(SolveStatus.OPTIMAL, float(np.dot(model.obj, x)), x, np.zeros(0))

"""LP entry point with a pluggable back end."""
from __future__ import annotations

import math

import numpy as np

from .model import LPModel, Solution, SolveStatus
from .simplex import simplex

BACKENDS = ("builtin", "highs")


def solve_lp(model: LPModel, backend: str = "builtin", warm=None, max_iter=None) -> Solution:
    """Solve an LP.  Non-optimal outcomes are reported through the status."""
    if backend == "builtin":
        return simplex(model, warm=warm, max_iter=max_iter)
    if backend == "highs":
        return _highs_lp(model)
    raise ValueError(f"unknown LP backend {backend!r}")


def _split_rows(model: LPModel):
    A = model.matrix().tocsr()
    sense = np.array(model.row_sense)
    b = np.asarray(model.rhs, dtype=float)
    le = np.flatnonzero(sense == "<=")
    ge = np.flatnonzero(sense == ">=")
    eq = np.flatnonzero(sense == "=")
    return A, b, le, ge, eq


def _highs_lp(model: LPModel) -> Solution:
    from scipy.optimize import linprog
    import scipy.sparse as sp

    sign = 1.0 if model.sense == "min" else -1.0
    A, b, le, ge, eq = _split_rows(model)
    A_ub = sp.vstack([A[le], -A[ge]]) if len(le) + len(ge) else None
    b_ub = np.concatenate([b[le], -b[ge]]) if len(le) + len(ge) else None
    A_eq = A[eq] if len(eq) else None
    b_eq = b[eq] if len(eq) else None
    bounds = [(None if math.isinf(lo) else lo, None if math.isinf(hi) else hi) for lo, hi in zip(model.lb, model.ub)]
    res = linprog(sign * np.asarray(model.obj), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        return Solution(SolveStatus.INFEASIBLE)
    if res.status == 3:
        return Solution(SolveStatus.UNBOUNDED)
    if res.status != 0:
        return Solution(SolveStatus.ITERATION_LIMIT)
    duals = np.zeros(model.num_rows)
    if len(le) + len(ge):
        mu = res.ineqlin.marginals
        duals[le] = mu[: len(le)]
        duals[ge] = -mu[len(le):]
    if len(eq):
        duals[eq] = res.eqlin.marginals
    x = np.asarray(res.x)
    return Solution(SolveStatus.OPTIMAL, float(np.dot(model.obj, x)), x, sign * duals, iterations=int(res.nit))

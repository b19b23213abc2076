"""Best-first branch and bound over binary variables.

Branches on the lowest-index fractional binary, zero child first, so
builders control the branching order through the order they add binaries.
"""
from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

from ..errors import GuardExceeded
from .lp import solve_lp
from .model import MILPModel, Solution, SolveStatus

INT_TOL = 1e-6
MAX_BINARIES = 32


def solve_milp(model: MILPModel, backend: str = "builtin", max_nodes: int = 200000, gap_tol: float = 1e-9) -> Solution:
    if backend == "highs":
        return _highs_milp(model)
    if backend != "builtin":
        raise ValueError(f"unknown MILP backend {backend!r}")
    binaries = sorted(model.binaries)
    if len(binaries) > MAX_BINARIES:
        raise GuardExceeded(f"{len(binaries)} binaries exceed the built-in limit of {MAX_BINARIES}")
    sign = 1.0 if model.sense == "min" else -1.0  # internally minimize sign*obj

    work = model.copy()
    base_lb = list(work.lb)
    base_ub = list(work.ub)
    counter = itertools.count()
    incumbent = None
    best = math.inf
    nodes = 0
    iterations = 0
    heap = [(-math.inf, next(counter), {}, None)]
    saw_limit = False
    while heap:
        bound, _, fixed, warm = heapq.heappop(heap)
        if bound >= best - _gap(best, gap_tol):
            continue
        nodes += 1
        if nodes > max_nodes:
            saw_limit = True
            break
        work.lb = list(base_lb)
        work.ub = list(base_ub)
        for j, val in fixed.items():
            work.lb[j] = work.ub[j] = float(val)
        sol = solve_lp(work, warm=warm)
        iterations += sol.iterations
        if sol.status is SolveStatus.INFEASIBLE:
            continue
        if sol.status is SolveStatus.UNBOUNDED:
            return Solution(SolveStatus.UNBOUNDED, nodes=nodes, iterations=iterations)
        if sol.status is not SolveStatus.OPTIMAL:
            saw_limit = True
            continue
        value = sign * sol.value
        if value >= best - _gap(best, gap_tol):
            continue
        frac = [j for j in binaries if j not in fixed and min(sol.x[j], 1 - sol.x[j]) > INT_TOL]
        if not frac:
            x = sol.x.copy()
            for j in binaries:
                x[j] = float(round(x[j]))
            best = value
            incumbent = Solution(SolveStatus.OPTIMAL, float(np.dot(model.obj, x)), x, None)
            continue
        j = frac[0]
        for val in (0, 1):  # floor child first
            child = dict(fixed)
            child[j] = val
            heapq.heappush(heap, (value, next(counter), child, sol.warm))
    if incumbent is None:
        status = SolveStatus.ITERATION_LIMIT if saw_limit else SolveStatus.INFEASIBLE
        return Solution(status, nodes=nodes, iterations=iterations)
    if saw_limit:
        incumbent.status = SolveStatus.ITERATION_LIMIT
    incumbent.nodes = nodes
    incumbent.iterations = iterations
    return incumbent


def _gap(best, tol):
    if not math.isfinite(best):
        return 0.0
    return tol * max(1.0, abs(best))


def _highs_milp(model: MILPModel) -> Solution:
    from scipy.optimize import Bounds, LinearConstraint, milp

    sign = 1.0 if model.sense == "min" else -1.0
    A = model.matrix()
    lo = np.array([b if s != "<=" else -np.inf for s, b in zip(model.row_sense, model.rhs)])
    hi = np.array([b if s != ">=" else np.inf for s, b in zip(model.row_sense, model.rhs)])
    integrality = np.zeros(model.num_vars)
    integrality[sorted(model.binaries)] = 1
    cons = [LinearConstraint(A, lo, hi)] if model.num_rows else []
    res = milp(sign * np.asarray(model.obj), constraints=cons, integrality=integrality,
               bounds=Bounds(np.asarray(model.lb), np.asarray(model.ub)))
    if res.status == 2:
        return Solution(SolveStatus.INFEASIBLE)
    if res.status == 3:
        return Solution(SolveStatus.UNBOUNDED)
    if res.x is None:
        return Solution(SolveStatus.ITERATION_LIMIT)
    x = np.asarray(res.x)
    return Solution(SolveStatus.OPTIMAL, float(np.dot(model.obj, x)), x)

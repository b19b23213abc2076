"""Brute-force reference computations over the full ranking space.

Nothing here reuses the tuple machinery: every quantity is rebuilt from
explicit permutations so it can be compared against the fast paths.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import InconsistentData, NumericalFailure, TooLarge
from .opt import INF, LPModel, SolveStatus, solve_lp

MAX_N_TUPLES = 6
MAX_N_LP = 5


def _guard(n, limit):
    if n > limit:
        raise TooLarge(f"oracle refuses n={n} (limit {limit})")


def _perms(n):
    # sigma[i] is the rank of product i
    return list(itertools.permutations(range(n + 1)))


def _first(sigma, S):
    best, best_rank = None, None
    for i in S:
        if best_rank is None or sigma[i] < best_rank:
            best, best_rank = i, sigma[i]
    return best


def oracle_feasible_tuples(inst) -> set:
    _guard(inst.n, MAX_N_TUPLES)
    past = [sorted(S) for S in inst.past_assortments]
    return {tuple(_first(s, S) for S in past) for s in _perms(inst.n)}


def oracle_rho(tup, S, inst, best=False) -> float:
    return oracle_rho_table(inst, [S], best)[(tuple(tup), frozenset(S))]


def oracle_rho_table(inst, assortments, best=False) -> Dict[Tuple[tuple, frozenset], float]:
    """Worst (or best) revenue per (tuple, S) pair over all inducing rankings."""
    _guard(inst.n, MAX_N_TUPLES)
    past = [sorted(S) for S in inst.past_assortments]
    assortments = [frozenset(S) for S in assortments]
    r = inst.revenues
    out: Dict[Tuple[tuple, frozenset], float] = {}
    for s in _perms(inst.n):
        t = tuple(_first(s, S) for S in past)
        for S in assortments:
            val = r[_first(s, S)]
            key = (t, S)
            prev = out.get(key)
            if prev is None or (val > prev if best else val < prev):
                out[key] = val
    return out


def _ranking_lp(inst, S, sense, eta=None):
    n = inst.n
    perms = _perms(n)
    r = inst.revenues
    eta = inst.eta if eta is None else eta
    lp = LPModel(sense, "oracle")
    lam = [lp.add_var(0.0, INF, r[_first(s, S)], f"s{k}") for k, s in enumerate(perms)]
    eps = []
    for m, Sm in enumerate(inst.past_assortments):
        Sm = sorted(Sm)
        picks = [_first(s, Sm) for s in perms]
        for i in Sm:
            row = {lam[k]: 1.0 for k, p in enumerate(picks) if p == i}
            if eta > 0:
                e = lp.add_var(-INF, INF, 0.0, f"e{m}_{i}")
                eps.append(e)
                row[e] = -1.0
            lp.add_row(row, "=", inst.sales[m].get(i, 0.0))
    lp.add_row({j: 1.0 for j in lam}, "=", 1.0)
    if eta > 0:
        if inst.norm == "linf":
            for e in eps:
                lp.add_row({e: 1.0}, "<=", eta)
                lp.add_row({e: 1.0}, ">=", -eta)
        else:
            ts = []
            for e in eps:
                t = lp.add_var(0.0, INF, 0.0)
                ts.append(t)
                lp.add_row({t: 1.0, e: -1.0}, ">=", 0.0)
                lp.add_row({t: 1.0, e: 1.0}, ">=", 0.0)
            lp.add_row({t: 1.0 for t in ts}, "<=", eta)
    return lp


def _solve(lp, backend):
    sol = solve_lp(lp, backend=backend)
    if sol.status is SolveStatus.INFEASIBLE:
        raise InconsistentData("no ranking model fits the data")
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(f"oracle LP ended with {sol.status.value}")
    return sol


def oracle_worst_case(inst, S, backend="builtin") -> float:
    _guard(inst.n, MAX_N_LP)
    return _solve(_ranking_lp(inst, frozenset(S) | {0}, "min"), backend).value


def oracle_best_case(inst, S, backend="builtin") -> float:
    _guard(inst.n, MAX_N_LP)
    return _solve(_ranking_lp(inst, frozenset(S) | {0}, "max"), backend).value


def all_assortments(n):
    for bits in range(1 << n):
        yield frozenset([0] + [i + 1 for i in range(n) if bits >> i & 1])


def oracle_ro(inst, tol=1e-7, backend="builtin") -> Tuple[List[frozenset], float]:
    """All maximizers of the worst case over every assortment containing 0."""
    _guard(inst.n, MAX_N_LP)
    values = {S: oracle_worst_case(inst, S, backend) for S in all_assortments(inst.n)}
    best = max(values.values())
    winners = sorted((S for S, v in values.items() if v >= best - tol), key=lambda S: sorted(S))
    return winners, best


def oracle_feasible(inst, eta) -> bool:
    lp = _ranking_lp(inst, frozenset({0}), "min", eta=eta)
    return solve_lp(lp).status is SolveStatus.OPTIMAL


def oracle_min_radius(inst, tol=1e-7, hi=None) -> float:
    """Bisection on the radius with a feasibility LP over all rankings."""
    _guard(inst.n, MAX_N_LP)
    lo = 0.0
    if oracle_feasible(inst, 0.0):
        return 0.0
    hi = hi if hi is not None else (2.0 * inst.M * (inst.n + 1) if inst.norm == "l1" else 1.0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if oracle_feasible(inst, mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_deviation: float = 0.0
    counterexample: Optional[dict] = None


@dataclass
class OracleReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, **kw) -> str:
        return json.dumps({"passed": self.passed, "checks": [asdict(c) for c in self.checks]}, **kw)


def run_checks(inst, check="all", tol=1e-6) -> OracleReport:
    """Compare the fast paths with the oracles; check is all, L, rho, wc or ro."""
    from .robust import best_case_revenue, worst_case_revenue
    from .solve import solve_ro
    from .tuples import build_feasible_tuples, rho

    report = OracleReport()
    names = ["L", "rho", "wc", "ro"] if check == "all" else [check]
    if "L" in names:
        fast = build_feasible_tuples(inst).as_set()
        slow = oracle_feasible_tuples(inst)
        diff = sorted(fast ^ slow)
        report.checks.append(CheckResult("L", not diff, float(len(diff)),
                                         {"symmetric_difference": [list(t) for t in diff[:10]]} if diff else None))
    if "rho" in names:
        tuples = build_feasible_tuples(inst).tuples
        subsets = list(all_assortments(inst.n))
        table = oracle_rho_table(inst, subsets)
        worst, bad = 0.0, None
        for t in tuples:
            for S in subsets:
                d = abs(rho(t, S, inst.past_assortments, inst.revenues) - table[(t, S)])
                if d > worst:
                    worst = d
                    bad = {"tuple": list(t), "assortment": sorted(S)}
        report.checks.append(CheckResult("rho", worst <= tol, worst, None if worst <= tol else bad))
    if "wc" in names:
        worst, bad = 0.0, None
        for S in all_assortments(inst.n):
            for kind, fast, slow in (
                ("worst", worst_case_revenue(inst, S).value, oracle_worst_case(inst, S)),
                ("best", best_case_revenue(inst, S).value, oracle_best_case(inst, S)),
            ):
                d = abs(fast - slow)
                if d > worst:
                    worst = d
                    bad = {"assortment": sorted(S), "kind": kind, "fast": fast, "oracle": slow}
        report.checks.append(CheckResult("wc", worst <= tol, worst, None if worst <= tol else bad))
    if "ro" in names:
        winners, value = oracle_ro(inst)
        rep = solve_ro(inst)
        d = abs(rep.value - value)
        hit = frozenset(rep.assortment) in set(winners)
        ok = d <= tol and hit
        report.checks.append(CheckResult("ro", ok, d, None if ok else {
            "oracle_value": value, "oracle_optima": [sorted(S) for S in winners],
            "fast_value": rep.value, "fast_optimum": sorted(rep.assortment),
        }))
    return report

"""Robust assortment solvers, the Pareto sweep and the estimate-then-optimize baseline."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .candidates import candidates_two, enumerate_candidates
from .choice import RankingModel, demand, enumerate_rankings, top_choice
from .errors import BadParams, InconsistentData, NotApplicable, NumericalFailure, ThetaInfeasible, TooLarge
from .instance import (
    Instance,
    Structure,
    best_past_revenue,
    canonical_nested,
    classify_structure,
    from_mask,
    past_revenue,
    restrict_to_offered,
    to_mask,
)
from .opt import INF, LPModel, SolveStatus, linearize_norm_ball, solve_lp
from .robust import best_case_revenue, worst_case_revenue, worst_case_two_flow

METHODS = ("auto", "closed_form", "brute", "nested_milp", "two_flow")
TIE_TOL = 1e-9
ETO_MAX_N = 6


@dataclass
class SolveReport:
    method: str
    assortment: frozenset
    value: float
    optima: List[frozenset] = field(default_factory=list)
    table: List[Tuple[frozenset, float, Optional[float]]] = field(default_factory=list)  # (S, worst, best)
    timings: Dict[str, float] = field(default_factory=dict)
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "assortment": sorted(self.assortment),
            "value": self.value,
            "optima": [sorted(S) for S in self.optima],
            "table": [{"assortment": sorted(S), "worst": w, "best": b} for S, w, b in self.table],
            "timings": self.timings,
            "seed": self.seed,
        }


def _lift(inst: Instance, inner: Instance):
    """Map assortments of the restricted instance back to the original labels."""
    if inner is inst:
        return lambda S: frozenset(S)
    keep = sorted(inst.offered())
    return lambda S: frozenset(keep[i] for i in S)


def choose_method(inst: Instance) -> str:
    tag = classify_structure(inst)
    if tag.kind is Structure.REVENUE_ORDERED_COMPLETE and inst.eta == 0:
        return "closed_form"
    if tag.is_nested:
        return "nested_milp"
    if inst.M == 2 and inst.eta == 0:
        return "two_flow"
    return "brute"


def _pick(rows):
    """Best value, then smallest mask among the rows within TIE_TOL of it."""
    best = max(w for _, w, _ in rows)
    optima = sorted((S for S, w, _ in rows if w >= best - TIE_TOL), key=to_mask)
    return best, optima


def solve_ro(inst: Instance, method: str = "auto", with_best: bool = False, backend: str = "builtin") -> SolveReport:
    """Robust assortment: the highest worst-case revenue over all assortments."""
    if method not in METHODS:
        raise BadParams(f"unknown method {method!r}; expected one of {METHODS}")
    t0 = time.perf_counter()
    if method == "auto":
        method = choose_method(inst)
    inner = restrict_to_offered(inst)
    lift = _lift(inst, inner)
    rows = []
    if method == "closed_form":
        tag = classify_structure(inst)
        if tag.kind is not Structure.REVENUE_ORDERED_COMPLETE or inst.eta != 0:
            raise NotApplicable("closed form needs the complete revenue-ordered family with eta = 0")
        rows = [(S, past_revenue(inst, m + 1), None) for m, S in enumerate(inst.past_assortments)]
        value, optima = _pick(rows)
    elif method == "nested_milp":
        from .nested import solve_ro_milp

        S, value = solve_ro_milp(inner, backend=backend)
        S = lift(S)
        rows = [(S, value, None)]
        optima = [S]
    elif method == "two_flow":
        if inner.M != 2 or inner.eta != 0:
            raise NotApplicable("the flow route needs two past assortments and eta = 0")
        for S in candidates_two(inner):
            rows.append((lift(S), worst_case_two_flow(inner, S).value, None))
        value, optima = _pick(rows)
    else:
        for S in enumerate_candidates(inner):
            rows.append((lift(S), worst_case_revenue(inner, S).value, None))
        value, optima = _pick(rows)
    if with_best:
        rows = [(S, w, best_case_revenue(inst, S).value) for S, w, _ in rows]
    rows.sort(key=lambda row: to_mask(row[0]))
    return SolveReport(method, optima[0], float(value), optima, rows, {"total": time.perf_counter() - t0})


# -- Pareto sweep ------------------------------------------------------------

@dataclass
class ParetoPoint:
    theta: float
    assortment: frozenset
    best_case: float
    worst_case: float
    best_past: float = float("nan")

    @property
    def improvement(self) -> Tuple[float, float]:
        """Percent change over the best past revenue, worst and best case."""
        if not self.best_past:
            return (float("nan"), float("nan"))
        scale = 100.0 / self.best_past
        return ((self.worst_case - self.best_past) * scale, (self.best_case - self.best_past) * scale)


def _grid(grid) -> List[float]:
    if isinstance(grid, int):
        if grid < 2:
            raise BadParams("grid needs at least two points")
        return [k / (grid - 1) for k in range(grid)]
    qs = sorted(float(q) for q in grid)
    if not qs or qs[0] < 0 or qs[-1] > 1:
        raise BadParams("grid values must lie in [0, 1]")
    return qs


def _enumeration_table(inner: Instance):
    rows = []
    for bits in range(1 << inner.n):
        S = from_mask(bits << 1 | 1)
        rows.append((S, worst_case_revenue(inner, S).value, best_case_revenue(inner, S).value))
    return rows


def pareto_sweep(inst: Instance, grid=101, method: str = "auto", dedupe: bool = True,
                 backend: str = "builtin") -> List[ParetoPoint]:
    """Highest best case subject to worst case >= q * RO, over a grid of q.

    Thresholds are visited in increasing order and the previous assortment
    is kept while it still meets the threshold; it is then optimal too, and
    this keeps both frontier columns monotone when the best case has ties.
    """
    qs = _grid(grid)
    inner = restrict_to_offered(inst)
    lift = _lift(inst, inner)
    tag = classify_structure(inner)
    if method == "auto":
        method = "milp" if tag.is_nested else "enumerate"
    if method not in ("milp", "enumerate"):
        raise BadParams(f"unknown Pareto method {method!r}")
    ro = solve_ro(inner, backend=backend).value
    past_best = best_past_revenue(inst)
    table = _enumeration_table(inner) if method == "enumerate" else None
    if method == "milp":
        from .nested import solve_pareto_milp

        work = canonical_nested(inner)
    points: List[ParetoPoint] = []
    prev = None
    for q in qs:
        theta = q * ro
        if prev is not None and prev.worst_case >= theta - TIE_TOL:
            points.append(ParetoPoint(theta, prev.assortment, prev.best_case, prev.worst_case, past_best))
            continue
        if method == "milp":
            S, best, worst = solve_pareto_milp(work, theta, backend=backend)
            S = lift(S)
        else:
            feasible = [(S, w, b) for S, w, b in table if w >= theta - TIE_TOL]
            if not feasible:
                raise ThetaInfeasible(f"no assortment guarantees {theta}")
            top = max(b for _, _, b in feasible)
            S, worst, best = min((row for row in feasible if row[2] >= top - TIE_TOL), key=lambda row: to_mask(row[0]))
            S = lift(S)
        prev = ParetoPoint(theta, S, float(best), float(worst), past_best)
        points.append(prev)
    if not dedupe:
        return points
    seen = {}
    for p in points:
        seen.setdefault(p.assortment, p)
    return sorted(seen.values(), key=lambda p: (p.worst_case, -p.best_case))


# -- estimate-then-optimize --------------------------------------------------

@dataclass
class EtoResult:
    assortment: frozenset
    worst: float
    best: float
    best_past: float
    estimate: RankingModel


def _ranking_space_lp(inst: Instance, rankings, costs) -> Tuple[LPModel, List[int]]:
    lp = LPModel("min", "estimate")
    lam = [lp.add_var(0.0, INF, float(c), f"lam{k}") for k, c in enumerate(costs)]
    eps = []
    for m, S in enumerate(inst.past_assortments):
        picks = [top_choice(s, S) for s in rankings]
        for i in sorted(S):
            row = {lam[k]: 1.0 for k, p in enumerate(picks) if p == i}
            if inst.eta > 0:
                e = lp.add_var(-INF, INF, 0.0, f"eps{m + 1}_{i}")
                eps.append(e)
                row[e] = -1.0
            lp.add_row(row, "=", inst.v(m, i))
    lp.add_row({j: 1.0 for j in lam}, "=", 1.0, "mass")
    if eps:
        linearize_norm_ball(lp, eps, inst.norm, inst.eta)
    return lp, lam


def estimate_model(inst: Instance, rng) -> RankingModel:
    """A consistent ranking model picked by a random linear cost."""
    if inst.n > ETO_MAX_N:
        raise TooLarge(f"the ranking-space estimate needs n <= {ETO_MAX_N}")
    rankings = list(enumerate_rankings(inst.n))
    costs = rng.random(len(rankings))
    lp, lam = _ranking_space_lp(inst, rankings, costs)
    sol = solve_lp(lp)
    if sol.status is SolveStatus.INFEASIBLE:
        raise InconsistentData("no ranking model fits the data")
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(f"estimation LP ended with {sol.status.value}")
    pairs = [(rankings[k], float(sol.x[j])) for k, j in enumerate(lam) if sol.x[j] > 1e-12]
    return RankingModel.from_weights(pairs)


def best_response(inst: Instance, model: RankingModel) -> frozenset:
    """Revenue-maximizing assortment under one model (smallest mask on ties)."""
    r = np.asarray(inst.revenues)
    best_val, best_S = -math.inf, None
    for bits in range(1 << inst.n):
        S = from_mask(bits << 1 | 1)
        val = float(r @ demand(model, S, inst.n))
        if val > best_val + TIE_TOL:
            best_val, best_S = val, S
    return best_S


def eto_baseline(inst: Instance, seed=0, model: Optional[RankingModel] = None) -> EtoResult:
    """Estimate one consistent model, optimize against it, report the range over all models."""
    from .generators import make_rng

    est = model if model is not None else estimate_model(inst, make_rng(seed))
    S = best_response(inst, est)
    return EtoResult(
        S,
        worst_case_revenue(inst, S).value,
        best_case_revenue(inst, S).value,
        best_past_revenue(inst),
        est,
    )

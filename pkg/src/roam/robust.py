"""Worst-case and best-case expected revenue of a fixed assortment.

The consistent choice models are represented by weights on feasible
tuples.  Each tuple contributes the lowest (worst case) or highest (best
case) revenue among the products the assortment could sell to it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .choice import RankingModel
from .errors import ExplosionGuard, InconsistentData, NotApplicable, NumericalFailure
from .instance import Instance, classify_structure, to_mask
from .opt import INF, FlowNetwork, LPModel, SolveStatus, linearize_norm_ball, solve_lp, solve_min_cost_flow
from .tuples import DEFAULT_CAP, RhoTable, TupleGraph, admissible, build_feasible_tuples, rho_two

WITNESS_TOL = 1e-12
FLIP_TOL = 1e-6


@dataclass
class RobustValue:
    value: float
    witness: Dict[tuple, float] = field(default_factory=dict)  # tuple -> weight
    epsilon: Dict[Tuple[int, int], float] = field(default_factory=dict)  # (m 1-based, i) -> residual
    method: str = "tuple_lp"


def _check(sol, what):
    if sol.status is SolveStatus.INFEASIBLE:
        raise InconsistentData(f"no choice model is consistent with the data ({what})")
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(f"{what}: solver returned {sol.status.value}")


class TupleEvaluator:
    """The tuple LP of one instance, reused across assortments with warm starts."""

    def __init__(self, inst: Instance, cap: int = DEFAULT_CAP, backend: str = "builtin", tuples=None):
        self.inst = inst
        self.backend = backend
        self.L = tuples if tuples is not None else build_feasible_tuples(inst, cap)
        self.table = RhoTable(self.L.tuples, inst.past_assortments)
        self.model, self.lam, self.eps = self._build()
        self._warm = {}

    def _build(self):
        inst = self.inst
        lp = LPModel("min", "worst_case")
        lam = [lp.add_var(0.0, INF, 0.0, f"lam{k}") for k in range(len(self.L))]
        eps = {}
        use_eps = inst.eta > 0
        for m, S in enumerate(inst.past_assortments):
            for i in sorted(S):
                row = {lam[k]: 1.0 for k in self.L.by_choice.get((m, i), [])}
                if use_eps:
                    e = lp.add_var(-INF, INF, 0.0, f"eps{m + 1}_{i}")
                    eps[(m + 1, i)] = e
                    row[e] = -1.0
                lp.add_row(row, "=", inst.v(m, i), f"marg{m + 1}_{i}")
        lp.add_row({j: 1.0 for j in lam}, "=", 1.0, "mass")
        if use_eps:
            linearize_norm_ball(lp, list(eps.values()), inst.norm, inst.eta)
        return lp, lam, eps

    def solve_with(self, costs, sense: str, key=None) -> RobustValue:
        lp = self.model
        lp.sense = sense
        for j, c in zip(self.lam, costs):
            lp.obj[j] = c
        sol = solve_lp(lp, backend=self.backend, warm=self._warm.get(key or sense))
        _check(sol, f"{sense} over tuples")
        if sol.warm is not None:
            self._warm[key or sense] = sol.warm
        witness = {t: float(sol.x[j]) for t, j in zip(self.L.tuples, self.lam) if sol.x[j] > WITNESS_TOL}
        epsilon = {k: float(sol.x[j]) for k, j in self.eps.items()}
        return RobustValue(sol.value, witness, epsilon)

    def rho_values(self, S, best=False, revenues=None):
        mask = to_mask(S)
        if revenues is None:
            return self.table.values_sorted(mask, self.inst.revenues, best)
        return self.table.values(mask, revenues, best)

    def worst(self, S) -> RobustValue:
        return self.solve_with(self.rho_values(S), "min")

    def best(self, S, check_flip: bool = True) -> RobustValue:
        out = self.solve_with(self.rho_values(S, best=True), "max")
        if check_flip:
            r = self.inst.revenues
            top = r[-1]
            flipped = [top - x for x in r]
            low = self.solve_with(self.rho_values(S, revenues=flipped), "min", key="flip")
            if abs((top - low.value) - out.value) > FLIP_TOL * max(1.0, top):
                raise NumericalFailure(
                    f"best case {out.value} disagrees with flipped worst case {top - low.value}"
                )
        return out

    def min_radius(self) -> float:
        inst = self.inst
        lp = LPModel("min", "min_radius")
        lam = [lp.add_var(0.0, INF, 0.0, f"lam{k}") for k in range(len(self.L))]
        eps = []
        for m, S in enumerate(inst.past_assortments):
            for i in sorted(S):
                e = lp.add_var(-INF, INF, 0.0, f"eps{m + 1}_{i}")
                eps.append(e)
                row = {lam[k]: 1.0 for k in self.L.by_choice.get((m, i), [])}
                row[e] = -1.0
                lp.add_row(row, "=", inst.v(m, i))
        lp.add_row({j: 1.0 for j in lam}, "=", 1.0, "mass")
        if inst.norm == "linf":
            z = lp.add_var(0.0, INF, 1.0, "radius")
            for e in eps:
                lp.add_row({z: 1.0, e: -1.0}, ">=", 0.0)
                lp.add_row({z: 1.0, e: 1.0}, ">=", 0.0)
        else:
            for e in eps:
                t = lp.add_var(0.0, INF, 1.0, f"abs{e}")
                lp.add_row({t: 1.0, e: -1.0}, ">=", 0.0)
                lp.add_row({t: 1.0, e: 1.0}, ">=", 0.0)
        sol = solve_lp(lp, backend=self.backend)
        _check(sol, "minimum radius")
        return max(0.0, float(sol.value))


_CACHE: Dict[int, TupleEvaluator] = {}


def evaluator(inst: Instance, **kw) -> TupleEvaluator:
    """Evaluator cached per instance object."""
    key = id(inst)
    ev = _CACHE.get(key)
    if ev is None or ev.inst is not inst or kw:
        ev = TupleEvaluator(inst, **kw)
        if not kw:
            if len(_CACHE) > 64:
                _CACHE.clear()
            _CACHE[key] = ev
    return ev


def _nested_fallback(inst, S, best):
    tag = classify_structure(inst)
    if not (tag.is_nested and tag.covers_all_products):
        return None
    from .nested import compact_best_case, compact_worst_case

    return compact_best_case(inst, S) if best else compact_worst_case(inst, S)


def worst_case_revenue(inst: Instance, S) -> RobustValue:
    S = frozenset(S) | {0}
    try:
        ev = evaluator(inst)
    except ExplosionGuard:
        out = _nested_fallback(inst, S, best=False)
        if out is None:
            raise
        return out
    return ev.worst(S)


def best_case_revenue(inst: Instance, S, check_flip: bool = True) -> RobustValue:
    S = frozenset(S) | {0}
    try:
        ev = evaluator(inst)
    except ExplosionGuard:
        out = _nested_fallback(inst, S, best=True)
        if out is None:
            raise
        return out
    return ev.best(S, check_flip)


def min_consistency_radius(inst: Instance) -> float:
    return evaluator(inst).min_radius()


# -- two past assortments: min-cost flow route -------------------------------

def two_flow_network(inst: Instance, S):
    """Network whose min-cost flow plus a constant gives the worst case.

    Products offered only in S_1 supply v_{1,i}; products offered only in
    S_2 demand v_{2,i}.  A shared product i is split into a supply copy
    (v_{1,i}) and a demand copy (v_{2,i}) joined by an arc that carries the
    weight of the tuple (i, i); costs on the other arcs out of the supply
    copy are shifted by rho_ii, whose total is the constant.
    """
    S1, S2 = inst.past_assortments
    r = inst.revenues
    S = set(S)
    A = sorted(S1 - S2)
    B = sorted(S2 - S1)
    C = sorted(S1 & S2)
    net = FlowNetwork()
    node_a = {a: net.add_node(inst.v(0, a), f"a{a}") for a in A}
    node_out = {c: net.add_node(inst.v(0, c), f"c{c}_out") for c in C}
    node_in = {c: net.add_node(-inst.v(1, c), f"c{c}_in") for c in C}
    node_b = {b: net.add_node(-inst.v(1, b), f"b{b}") for b in B}
    arc_tuple = []
    diag = {c: rho_two((c, c), S, S1, S2, r) for c in C}
    constant = sum(diag[c] * inst.v(0, c) for c in C)
    for a in A:
        for b in B:
            net.add_arc(node_a[a], node_b[b], rho_two((a, b), S, S1, S2, r))
            arc_tuple.append((a, b))
        for c in C:
            net.add_arc(node_a[a], node_in[c], rho_two((a, c), S, S1, S2, r))
            arc_tuple.append((a, c))
    for c in C:
        for b in B:
            net.add_arc(node_out[c], node_b[b], rho_two((c, b), S, S1, S2, r) - diag[c])
            arc_tuple.append((c, b))
        net.add_arc(node_out[c], node_in[c], 0.0)
        arc_tuple.append((c, c))
    return net, arc_tuple, constant


class TwoFlowEvaluator:
    """The two-assortment network of one instance; only arc costs change with S.

    Costs follow the same case table as rho_two, vectorized over arcs.  With
    the simplex route the optimal basis of one assortment warm-starts the
    next, which makes sweeping all candidates cheap.
    """

    KIND_AB, KIND_AC, KIND_CB, KIND_CC = range(4)

    def __init__(self, inst: Instance, method: str = "simplex"):
        if inst.M != 2:
            raise NotApplicable("the flow route needs exactly two past assortments")
        if inst.eta != 0:
            raise NotApplicable("the flow route needs eta = 0")
        self.inst = inst
        self.method = method
        S1, S2 = inst.past_assortments
        self.net, self.arcs, _ = two_flow_network(inst, S1 | S2)
        A, B = S1 - S2, S2 - S1
        self.first = np.array([a for a, _ in self.arcs], dtype=int)
        self.second = np.array([b for _, b in self.arcs], dtype=int)
        kind = []
        for a, b in self.arcs:
            if a in A:
                kind.append(self.KIND_AB if b in B else self.KIND_AC)
            else:
                kind.append(self.KIND_CB if b in B else self.KIND_CC)
        self.kind = np.array(kind)
        self.common = np.array(sorted(S1 & S2), dtype=int)
        self.v1_common = np.array([inst.v(0, c) for c in self.common])
        self.only1 = np.array(sorted(A), dtype=int)
        self.only2 = np.array(sorted(B), dtype=int)
        self.offered = S1 | S2
        self.r = np.asarray(inst.revenues, dtype=float)
        self.lp = self.net.to_lp() if method == "simplex" else None
        self._warm = None

    def rho(self, S) -> np.ndarray:
        """rho_two of every arc's tuple under S."""
        r = self.r
        inS = np.zeros(len(r), dtype=bool)
        inS[list(S)] = True

        def low(items):
            sel = items[inS[items]] if len(items) else items
            return r[sel].min() if len(sel) else np.inf

        min_a, min_b = low(self.only1), low(self.only2)
        extra = [j for j in S if j not in self.offered]
        outside = r[extra].min() if extra else np.inf
        i1, i2 = self.first, self.second
        in1, in2, r1, r2 = inS[i1], inS[i2], r[i1], r[i2]
        k = self.kind
        ab = np.where(in1 & in2, np.minimum(r1, r2),
                      np.where(in1, np.minimum(r1, min_b), np.where(in2, np.minimum(r2, min_a), 0.0)))
        ac = np.where(in1, r1, np.where(in2, np.minimum(r2, min_a), 0.0))
        cb = np.where(in2, r2, np.where(in1, np.minimum(r1, min_b), 0.0))
        cc = np.where(in1, r1, 0.0)
        core = np.select([k == self.KIND_AB, k == self.KIND_AC, k == self.KIND_CB], [ab, ac, cb], cc)
        return np.minimum(core, outside)

    def worst(self, S) -> RobustValue:
        S = frozenset(S) | {0}
        rho = self.rho(S)
        diag = np.zeros(len(self.r))
        cc = self.kind == self.KIND_CC
        diag[self.first[cc]] = rho[cc]
        costs = rho - np.where((self.kind == self.KIND_CB) | cc, diag[self.first], 0.0)
        constant = float(np.dot(diag[self.common], self.v1_common)) if len(self.common) else 0.0
        if self.method == "simplex":
            self.lp.obj = [float(c) for c in costs]
            sol = solve_lp(self.lp, warm=self._warm)
            if sol.warm is not None and sol.status is SolveStatus.OPTIMAL:
                self._warm = sol.warm
        else:
            self.net.costs = [float(c) for c in costs]
            sol = solve_min_cost_flow(self.net)
        _check(sol, "two-assortment flow")
        witness = {t: float(f) for t, f in zip(self.arcs, sol.x) if f > WITNESS_TOL}
        return RobustValue(constant + sol.value, witness, {}, method="two_flow")


_FLOW_CACHE: Dict[Tuple[int, str], TwoFlowEvaluator] = {}


def two_flow_evaluator(inst: Instance, method: str = "simplex") -> TwoFlowEvaluator:
    key = (id(inst), method)
    ev = _FLOW_CACHE.get(key)
    if ev is None or ev.inst is not inst:
        ev = TwoFlowEvaluator(inst, method)
        if len(_FLOW_CACHE) > 64:
            _FLOW_CACHE.clear()
        _FLOW_CACHE[key] = ev
    return ev


def worst_case_two_flow(inst: Instance, S, method: str = "simplex") -> RobustValue:
    """Worst case through the min-cost flow reformulation (two assortments, eta = 0)."""
    return two_flow_evaluator(inst, method).worst(S)


# -- witnesses as explicit rankings ------------------------------------------

def tuple_ranking(tup, S, past, n, revenues, best=False) -> Tuple[int, ...]:
    """A ranking that produces the tuple and buys the worst (or best) admissible product of S."""
    g = TupleGraph(tup, past)
    cand = admissible(tup, S, past)
    pick = (max if best else min)(cand, key=lambda i: revenues[i])
    # everything pick must rank below: vertices reachable from it
    below = set()
    stack = [pick]
    while stack:
        u = stack.pop()
        for w in g.succ.get(u, ()):
            if w not in below:
                below.add(w)
                stack.append(w)
    order_all = g.topological_order()  # predecessors first
    # a vertex must come after everything it points to, so reverse
    preferred = list(reversed(order_all))
    first = [v for v in preferred if v in below]
    rest = [v for v in preferred if v not in below and v != pick]
    placed = set(preferred) | {pick}
    others = [i for i in range(n + 1) if i not in placed]
    order = first + [pick] + rest + others
    sigma = [0] * (n + 1)
    for rank, i in enumerate(order):
        sigma[i] = rank
    return tuple(sigma)


def witness_model(inst: Instance, S, value: RobustValue, best=False) -> RankingModel:
    pairs = [
        (tuple_ranking(t, S, inst.past_assortments, inst.n, inst.revenues, best), w)
        for t, w in value.witness.items()
    ]
    return RankingModel.from_weights(pairs)

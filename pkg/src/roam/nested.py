"""Nested past assortments: layered flow model, robust MILP and Pareto MILP.

Layer m of the layered graph holds vertices (m, i, k): the customer buys
i from S_m and the worst product bought so far from the new assortment is
k (represented by its index; revenues are distinct).  A unit of flow from
layer 1 to layer M is a tuple with its revenue, and the worst case is a
min-cost flow with marginal constraints on each layer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InconsistentData, NonConservativeFlow, NotApplicable, NotNested, NumericalFailure, ThetaInfeasible
from .instance import Instance, canonical_nested, nested_order
from .opt import INF, LPModel, MILPModel, SolveStatus, dualize_into, linearize_norm_ball, solve_lp, solve_milp
from .robust import RobustValue
from .tuples import blocks_of, rho_nested_prefix

FLOW_TOL = 1e-9
PATH_TOL = 1e-12

Vertex = Tuple[int, int, int]  # (layer 1-based, product, worst-so-far product)


def _chain(inst: Instance) -> Instance:
    if nested_order(inst.past_assortments) is None:
        raise NotNested("past assortments do not form a strict chain")
    return canonical_nested(inst)


def blocks(inst: Instance) -> List[FrozenSet[int]]:
    return blocks_of(_chain(inst).past_assortments)


@dataclass
class LayeredGraph:
    M: int
    blocks: List[FrozenSet[int]]
    vertices: List[Vertex]
    index: Dict[Vertex, int]
    edges: List[Tuple[int, int]]
    out_edges: List[List[int]]
    in_edges: List[List[int]]
    layer_of: np.ndarray

    @property
    def num_vertices(self):
        return len(self.vertices)


def build_layered_graph(inst: Instance) -> LayeredGraph:
    inst = _chain(inst)
    past = inst.past_assortments
    B = blocks_of(past)
    M = len(past)
    vertices: List[Vertex] = []
    for m, S in enumerate(past, start=1):
        for i in sorted(S):
            for k in sorted(S):
                vertices.append((m, i, k))
    index = {v: j for j, v in enumerate(vertices)}
    edges = []
    out_edges = [[] for _ in vertices]
    in_edges = [[] for _ in vertices]
    for u, (m, i, k) in enumerate(vertices):
        if m == M:
            continue
        nxt = sorted(B[m])  # block of layer m+1
        for i2 in [i] + nxt:
            for k2 in [k] + nxt:
                w = index[(m + 1, i2, k2)]
                out_edges[u].append(len(edges))
                in_edges[w].append(len(edges))
                edges.append((u, w))
    layer_of = np.array([v[0] for v in vertices])
    return LayeredGraph(M, B, vertices, index, edges, out_edges, in_edges, layer_of)


def forbidden_vertices(inst: Instance, S) -> set:
    inst = _chain(inst)
    S = set(S) | {0}
    B = blocks_of(inst.past_assortments)
    out = set()
    for m, Sm in enumerate(inst.past_assortments, start=1):
        b = B[m - 1]
        for i in Sm:
            for k in Sm:
                if _is_forbidden(i, k, b, S):
                    out.add((m, i, k))
    return out


def _is_forbidden(i, k, block, S) -> bool:
    if i in S and i in block and k != i:
        return True
    if i in S and i not in block and k in block:
        return True
    return k in block and k not in S


@dataclass
class LayeredFlow:
    graph: LayeredGraph
    g: np.ndarray
    f: np.ndarray
    epsilon: Dict[Tuple[int, int], float] = field(default_factory=dict)


class CompactModel:
    """Primal flow LP of one nested instance, reused across assortments."""

    def __init__(self, inst: Instance, backend: str = "builtin"):
        self.inst = _chain(inst)
        self.backend = backend
        self.graph = build_layered_graph(self.inst)
        self.lp, self.f, self.g, self.eps = build_primal(self.inst, self.graph, mass_row=None)
        self._warm = {}

    def solve(self, S, best=False) -> Tuple[float, LayeredFlow]:
        inst, G, lp = self.inst, self.graph, self.lp
        S = frozenset(S) | {0}
        r = inst.revenues
        top = inst.past_assortments[-1]
        extra = [r[j] for j in S - top]
        lp.sense = "max" if best else "min"
        for u, (m, i, k) in enumerate(G.vertices):
            j = self.g[u]
            lp.ub[j] = 0.0 if _is_forbidden(i, k, G.blocks[m - 1], S) else INF
            if m == G.M:
                val = r[k]
                if extra:
                    val = max([val] + extra) if best else min([val] + extra)
                lp.obj[j] = val
        key = "max" if best else "min"
        sol = solve_lp(lp, backend=self.backend, warm=self._warm.get(key))
        if sol.status is SolveStatus.INFEASIBLE:
            raise InconsistentData("no choice model is consistent with the data (compact model)")
        if sol.status is not SolveStatus.OPTIMAL:
            raise NumericalFailure(f"compact model ended with {sol.status.value}")
        if sol.warm is not None:
            self._warm[key] = sol.warm
        flow = LayeredFlow(G, sol.x[self.g].copy(), sol.x[self.f].copy(),
                           {k: float(sol.x[j]) for k, j in self.eps.items()})
        return sol.value, flow


def build_primal(inst, G, mass_row=None, target=None, with_eps=None):
    """Flow rows of the compact model (no forbidden set, zero objective).

    The mass row is added when eta > 0 (with eta == 0 the marginal rows
    already fix the total) unless mass_row says otherwise.
    """
    lp = target if target is not None else LPModel("min", "compact")
    f = np.array([lp.add_var(0.0, INF, 0.0, f"f{e}") for e in range(len(G.edges))], dtype=int)
    g = np.array([lp.add_var(0.0, INF, 0.0, "g{}_{}_{}".format(*v)) for v in G.vertices], dtype=int)
    use_eps = inst.eta > 0 if with_eps is None else with_eps
    eps = {}
    by_choice: Dict[Tuple[int, int], List[int]] = {}
    for u, (m, i, k) in enumerate(G.vertices):
        by_choice.setdefault((m, i), []).append(u)
    for m, Sm in enumerate(inst.past_assortments, start=1):
        for i in sorted(Sm):
            row = {int(g[u]): 1.0 for u in by_choice[(m, i)]}
            if use_eps:
                e = lp.add_var(-INF, INF, 0.0, f"eps{m}_{i}")
                eps[(m, i)] = e
                row[e] = -1.0
            lp.add_row(row, "=", inst.v(m - 1, i), f"marg{m}_{i}")
    for u, (m, i, k) in enumerate(G.vertices):
        if m < G.M:
            row = {int(f[e]): 1.0 for e in G.out_edges[u]}
            row[int(g[u])] = -1.0
            lp.add_row(row, "=", 0.0, "out{}_{}_{}".format(m, i, k))
        if m > 1:
            row = {int(f[e]): 1.0 for e in G.in_edges[u]}
            row[int(g[u])] = -1.0
            lp.add_row(row, "=", 0.0, "in{}_{}_{}".format(m, i, k))
    if mass_row if mass_row is not None else use_eps:
        lp.add_row({int(g[u]): 1.0 for u in range(G.num_vertices) if G.vertices[u][0] == G.M}, "=", 1.0, "mass")
    if use_eps:
        linearize_norm_ball(lp, list(eps.values()), inst.norm, inst.eta)
    return lp, f, g, eps


_MODELS: Dict[int, tuple] = {}


def compact_model(inst: Instance) -> CompactModel:
    hit = _MODELS.get(id(inst))
    if hit is not None and hit[0] is inst:
        return hit[1]
    cm = CompactModel(inst)
    if len(_MODELS) > 64:
        _MODELS.clear()
    _MODELS[id(inst)] = (inst, cm)
    return cm


def compact_worst_case(inst: Instance, S) -> RobustValue:
    value, flow = compact_model(inst).solve(S)
    lam = decompose_flow_to_lambda(inst, S, flow)
    return RobustValue(value, lam, flow.epsilon, method="compact")


def compact_best_case(inst: Instance, S) -> RobustValue:
    value, flow = compact_model(inst).solve(S, best=True)
    lam = decompose_flow_to_lambda(inst, S, flow)
    return RobustValue(value, lam, flow.epsilon, method="compact")


def compact_flow(inst: Instance, S, best=False) -> Tuple[float, LayeredFlow]:
    return compact_model(inst).solve(S, best)


# -- flow decomposition ------------------------------------------------------

def check_conservation(flow: LayeredFlow, tol=1e-7):
    G = flow.graph
    for u in range(G.num_vertices):
        m = G.vertices[u][0]
        if flow.g[u] < -tol:
            raise NonConservativeFlow(f"negative throughput at {G.vertices[u]}")
        if m < G.M and abs(sum(flow.f[e] for e in G.out_edges[u]) - flow.g[u]) > tol:
            raise NonConservativeFlow(f"out-flow mismatch at {G.vertices[u]}")
        if m > 1 and abs(sum(flow.f[e] for e in G.in_edges[u]) - flow.g[u]) > tol:
            raise NonConservativeFlow(f"in-flow mismatch at {G.vertices[u]}")
    if np.any(flow.f < -tol):
        raise NonConservativeFlow("negative arc flow")


def decompose_paths(flow: LayeredFlow) -> List[Tuple[List[int], float]]:
    """Strip layer-1 to layer-M paths, always following the largest remaining arc."""
    check_conservation(flow)
    G = flow.graph
    f = np.maximum(flow.f, 0.0).copy()
    g = np.maximum(flow.g, 0.0).copy()
    starts = [u for u in range(G.num_vertices) if G.vertices[u][0] == 1]
    paths = []
    guard = len(G.edges) + G.num_vertices + 10
    while True:
        u0 = max(starts, key=lambda u: g[u])
        if g[u0] <= PATH_TOL or guard <= 0:
            break
        guard -= 1
        path = [u0]
        arcs = []
        weight = g[u0]
        u = u0
        while G.vertices[u][0] < G.M:
            outs = G.out_edges[u]
            e = max(outs, key=lambda e: f[e])
            if f[e] <= PATH_TOL:
                break
            weight = min(weight, f[e])
            arcs.append(e)
            u = G.edges[e][1]
            path.append(u)
        if G.vertices[u][0] < G.M:
            # numerically stranded throughput; drop it
            g[u0] = 0.0
            continue
        for e in arcs:
            f[e] -= weight
        for v in path:
            g[v] -= weight
        if weight > PATH_TOL:
            paths.append((path, float(weight)))
    return paths


def decompose_flow_to_lambda(inst: Instance, S, flow: LayeredFlow) -> Dict[tuple, float]:
    """Tuple weights from a layered flow (weights below 1e-12 dropped)."""
    G = flow.graph
    lam: Dict[tuple, float] = {}
    for path, w in decompose_paths(flow):
        t = tuple(G.vertices[u][1] for u in path)
        lam[t] = lam.get(t, 0.0) + w
    return lam


def path_kappas(flow: LayeredFlow) -> List[Tuple[tuple, tuple, float]]:
    """(tuple, per-layer worst-so-far products, weight) for every stripped path."""
    G = flow.graph
    out = []
    for path, w in decompose_paths(flow):
        out.append((tuple(G.vertices[u][1] for u in path), tuple(G.vertices[u][2] for u in path), w))
    return out


def flow_from_lambda(inst: Instance, S, lam: Dict[tuple, float], graph: Optional[LayeredGraph] = None) -> LayeredFlow:
    """Throughputs g and arc flows f that send each tuple along its worst-revenue path."""
    inst = _chain(inst)
    G = graph or build_layered_graph(inst)
    S = frozenset(S) | {0}
    r = inst.revenues
    product_of = {r[j]: j for j in range(inst.n + 1)}
    g = np.zeros(G.num_vertices)
    f = np.zeros(len(G.edges))
    edge_of = {e: k for k, e in enumerate(G.edges)}
    for t, w in lam.items():
        worst = rho_nested_prefix(t, S, inst.past_assortments, r)
        ks = [product_of[x] for x in worst]
        us = [G.index[(m, i, k)] for m, (i, k) in enumerate(zip(t, ks), start=1)]
        for u in us:
            g[u] += w
        for a, b in zip(us, us[1:]):
            f[edge_of[(a, b)]] += w
    return LayeredFlow(G, g, f)


# -- robust MILP -------------------------------------------------------------

def _cost_terms(inst, G, g, x_of):
    """Revenue plus penalties that price forbidden vertices out of the flow.

    The penalty of vertex (m, i, k) is r_max times the number of forbidding
    conditions it meets under the membership indicators x (product 0 is
    always offered, so its indicator is the constant 1).
    """
    rmax = inst.r_max
    base = {}
    terms = {}
    for u, (m, i, k) in enumerate(G.vertices):
        block = G.blocks[m - 1]
        c0 = inst.revenues[k] if m == G.M else 0.0
        lin: Dict[int, float] = {}

        def add(prod, coef):
            nonlocal c0
            if prod == 0:
                c0 += coef
            else:
                lin[x_of[prod]] = lin.get(x_of[prod], 0.0) + coef

        if i in block and k != i:
            add(i, rmax)
        if i not in block and k in block:
            add(i, rmax)
        if k in block:
            c0 += rmax
            add(k, -rmax)
        base[int(g[u])] = c0
        lin = {j: c for j, c in lin.items() if c != 0.0}
        if lin:
            terms[int(g[u])] = lin
    return base, terms


def _require_cover(inst):
    if inst.past_assortments[-1] != frozenset(range(inst.n + 1)):
        raise NotApplicable("the nested MILP needs the largest assortment to hold every product; restrict first")


def build_ro_milp(inst: Instance) -> Tuple[MILPModel, Dict[int, int]]:
    inst = _chain(inst)
    _require_cover(inst)
    G = build_layered_graph(inst)
    primal, f, g, eps = build_primal(inst, G)
    milp = MILPModel("max", "robust")
    # highest revenue first: branching on those products closes the search fastest
    x_of = {i: milp.add_binary(0.0, f"x{i}") for i in range(inst.n, 0, -1)}
    base, terms = _cost_terms(inst, G, g, x_of)
    for j, c in base.items():
        primal.obj[j] = c
    dm = dualize_into(primal, milp, terms, prefix="dual")
    for k, b in dm.objective.items():
        milp.obj[k] = b
    return milp, x_of


def solve_ro_milp(inst: Instance, backend: str = "builtin"):
    """Robust assortment and its worst-case revenue from one MILP."""
    milp, x_of = build_ro_milp(inst)
    sol = solve_milp(milp, backend=backend)
    if sol.status is SolveStatus.INFEASIBLE:
        raise InconsistentData("robust MILP is infeasible")
    if sol.status is SolveStatus.UNBOUNDED:
        raise InconsistentData("robust MILP is unbounded: no choice model fits the data")
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(f"robust MILP ended with {sol.status.value}")
    S = frozenset([0] + [i for i, j in x_of.items() if sol.x[j] > 0.5])
    return S, float(sol.value)


def build_pareto_milp(inst: Instance, theta: float):
    inst = _chain(inst)
    _require_cover(inst)
    G = build_layered_graph(inst)
    milp = MILPModel("max", "pareto")
    # highest revenue first: branching on those products closes the search fastest
    x_of = {i: milp.add_binary(0.0, f"x{i}") for i in range(inst.n, 0, -1)}
    # primal flow of the best case, restricted by the membership indicators
    _, f, g, eps = build_primal(inst, G, target=milp)
    for u, (m, i, k) in enumerate(G.vertices):
        j = int(g[u])
        if m == G.M:
            milp.obj[j] = inst.revenues[k]
        block = G.blocks[m - 1]
        # each forbidding condition becomes g <= 1 - [condition holds]
        conds = []
        if i in block and k != i:
            conds.append((i, True))
        if i not in block and k in block:
            conds.append((i, True))
        if k in block:
            conds.append((k, False))
        for prod, when_in in conds:
            if prod == 0:
                if when_in:
                    milp.ub[j] = 0.0
                continue
            if when_in:
                milp.add_row({j: 1.0, x_of[prod]: 1.0}, "<=", 1.0)
            else:
                milp.add_row({j: 1.0, x_of[prod]: -1.0}, "<=", 0.0)
    # dual certificate of the worst case
    primal, f2, g2, _ = build_primal(inst, G)
    base, terms = _cost_terms(inst, G, g2, x_of)
    for j, c in base.items():
        primal.obj[j] = c
    dm = dualize_into(primal, milp, terms, prefix="dual")
    milp.add_row(dict(dm.objective), ">=", theta, "worst_case_floor")
    return milp, x_of


def solve_pareto_milp(inst: Instance, theta: float, backend: str = "builtin"):
    """Assortment with the highest best case among those with worst case >= theta."""
    milp, x_of = build_pareto_milp(inst, theta)
    sol = solve_milp(milp, backend=backend)
    if sol.status is SolveStatus.INFEASIBLE:
        raise ThetaInfeasible(f"no assortment guarantees {theta}")
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(f"Pareto MILP ended with {sol.status.value}")
    S = frozenset([0] + [i for i, j in x_of.items() if sol.x[j] > 0.5])
    worst = compact_worst_case(inst, S).value
    return S, float(sol.value), float(worst)

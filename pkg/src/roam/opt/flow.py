"""Minimum-cost flow.

Two routes.  "ssp" is successive shortest paths: arcs are uncapacitated
and costs may be negative as long as the network has no negative cycle;
a super source feeds every supply node and every demand node drains into
a super sink; Bellman-Ford gives the initial potentials and Dijkstra on
reduced costs finds each augmenting path.  "simplex" runs the built-in
simplex on the node-arc LP, which can be warm-started when only the arc
costs change between solves.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from ..errors import NumericalFailure
from .model import FlowNetwork, Solution, SolveStatus
from .simplex import simplex

BALANCE_TOL = 1e-9


class _Residual:
    def __init__(self, size):
        self.head = []
        self.cap = []
        self.cost = []
        self.adj = [[] for _ in range(size)]

    def add(self, u, v, cap, cost):
        self.adj[u].append(len(self.head))
        self.head.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.adj[v].append(len(self.head))
        self.head.append(u)
        self.cap.append(0.0)
        self.cost.append(-cost)
        return len(self.head) - 2


def solve_min_cost_flow(net: FlowNetwork, method: str = "ssp", warm=None) -> Solution:
    if abs(net.imbalance()) > BALANCE_TOL:
        raise ValueError(f"network is unbalanced by {net.imbalance()}")
    if method == "simplex":
        return simplex(net.to_lp(), warm=warm)
    if method != "ssp":
        raise ValueError(f"unknown flow method {method!r}")
    nn = net.num_nodes
    source, sink = nn, nn + 1
    g = _Residual(nn + 2)
    arc_edge = [g.add(t, h, math.inf, c) for t, h, c in zip(net.tails, net.heads, net.costs)]
    total = 0.0
    for v, s in enumerate(net.supply):
        if s > 0:
            g.add(source, v, s, 0.0)
            total += s
        elif s < 0:
            g.add(v, sink, -s, 0.0)
    eps = 1e-13 * max(1.0, total)

    pot = _bellman_ford(g, source, nn + 2)
    sent = 0.0
    rounds = 0
    while total - sent > eps:
        rounds += 1
        if rounds > 10 * (nn + 2) + 10 * net.num_arcs + 100:
            raise NumericalFailure("successive shortest paths did not terminate")
        dist, parent = _dijkstra(g, source, pot, eps)
        if not math.isfinite(dist[sink]):
            return Solution(SolveStatus.INFEASIBLE, iterations=rounds)
        for v in range(nn + 2):
            if math.isfinite(dist[v]):
                pot[v] += min(dist[v], dist[sink])
            else:
                pot[v] += dist[sink]
        push = total - sent
        v = sink
        while v != source:
            e = parent[v]
            push = min(push, g.cap[e])
            v = g.head[e ^ 1]
        v = sink
        while v != source:
            e = parent[v]
            g.cap[e] -= push
            g.cap[e ^ 1] += push
            v = g.head[e ^ 1]
        sent += push

    flows = np.array([g.cap[e ^ 1] for e in arc_edge])
    value = float(np.dot(flows, net.costs))
    return Solution(SolveStatus.OPTIMAL, value, flows, iterations=rounds)


def _bellman_ford(g, source, size):
    dist = [math.inf] * size
    dist[source] = 0.0
    for _ in range(size):
        changed = False
        for u in range(size):
            du = dist[u]
            if not math.isfinite(du):
                continue
            for e in g.adj[u]:
                if g.cap[e] > 0:
                    v = g.head[e]
                    nd = du + g.cost[e]
                    if nd < dist[v] - 1e-12:
                        dist[v] = nd
                        changed = True
        if not changed:
            break
    else:
        raise NumericalFailure("negative cycle in flow network")
    return [d if math.isfinite(d) else 0.0 for d in dist]


def _dijkstra(g, source, pot, eps):
    size = len(pot)
    dist = [math.inf] * size
    parent = [-1] * size
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * size
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        pu = pot[u]
        for e in g.adj[u]:
            if g.cap[e] <= eps:
                continue
            v = g.head[e]
            if done[v]:
                continue
            rc = g.cost[e] + pu - pot[v]
            if rc < 0:
                rc = 0.0  # rounding noise only; potentials keep reduced costs nonnegative
            nd = d + rc
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = e
                heapq.heappush(heap, (nd, v))
    return dist, parent

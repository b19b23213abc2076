"""Candidate assortments: the dominance graph and its closed subsets.

Product j dominates-into product i (edge j -> i) when r_j < r_i and every
past assortment offering j also offered i.  Some optimal robust assortment
is closed under these edges, so only closed sets containing 0 need to be
checked.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple

from .errors import ExplosionGuard, NotTwoAssortments
from .instance import Assortment, Instance, from_mask, to_mask

DEFAULT_CAP = 1 << 24


@dataclass(frozen=True)
class DominanceGraph:
    n: int
    offer_sets: Tuple[FrozenSet[int], ...]
    edges: FrozenSet[Tuple[int, int]]

    def succ_masks(self) -> List[int]:
        out = [0] * (self.n + 1)
        for a, b in self.edges:
            out[a] |= 1 << b
        return out

    def pred_masks(self) -> List[int]:
        out = [0] * (self.n + 1)
        for a, b in self.edges:
            out[b] |= 1 << a
        return out


def build_dominance_graph(inst: Instance) -> DominanceGraph:
    offers = inst.offer_sets()
    r = inst.revenues
    edges = set()
    for a in range(inst.n + 1):
        for b in range(inst.n + 1):
            if r[a] < r[b] and offers[a] <= offers[b]:
                edges.add((a, b))
    return DominanceGraph(inst.n, tuple(offers), frozenset(edges))


@dataclass(frozen=True)
class CandidateSet:
    assortments: Tuple[Assortment, ...]

    def __len__(self):
        return len(self.assortments)

    def __iter__(self):
        return iter(self.assortments)

    def __contains__(self, S):
        return frozenset(S) in set(self.assortments)


def _pivot_max_degree(V, succ, pred):
    best, best_deg = -1, -1
    v = V
    while v:
        low = v & -v
        i = low.bit_length() - 1
        deg = bin((succ[i] | pred[i]) & V).count("1")
        if deg > best_deg:
            best, best_deg = i, deg
        v ^= low
    return best


def _pivot_lowest(V, succ, pred):
    return (V & -V).bit_length() - 1


PIVOTS = {"max_degree": _pivot_max_degree, "lowest_index": _pivot_lowest}


def closed_subsets(graph: DominanceGraph, cap: int = DEFAULT_CAP, pivot: str = "max_degree") -> List[int]:
    """Masks of all successor-closed vertex sets that contain product 0."""
    succ = graph.succ_masks()
    pred = graph.pred_masks()
    choose = PIVOTS[pivot]
    count = [0]

    def step(V) -> List[int]:
        if V == 0:
            return [0]
        i = choose(V, succ, pred)
        bit = 1 << i
        # leave i out: everything that must be followed by i goes too
        without = step(V & ~(bit | pred[i]))
        # take i: its successors come along
        base = bit | (succ[i] & V)
        with_i = [s | base for s in step(V & ~(bit | succ[i]))]
        out = without + with_i
        count[0] = max(count[0], len(out))
        if count[0] > cap:
            raise ExplosionGuard(f"more than {cap} candidate assortments")
        return out

    everything = (1 << (graph.n + 1)) - 1
    start = 1 | succ[0]
    rest = everything & ~start
    return sorted(s | start for s in step(rest))


def enumerate_candidates(inst: Instance, cap: int = DEFAULT_CAP, pivot: str = "max_degree") -> CandidateSet:
    masks = closed_subsets(build_dominance_graph(inst), cap, pivot)
    return CandidateSet(tuple(from_mask(m) for m in masks))


def candidates_two(inst: Instance) -> CandidateSet:
    """Closed form for two past assortments.

    A fictitious product above every real product is added to both
    assortments so that both thresholds may exclude all exclusive products;
    it is stripped before returning.
    """
    if inst.M != 2:
        raise NotTwoAssortments("candidates_two needs exactly two past assortments")
    S1, S2 = inst.past_assortments
    top = inst.n + 1
    S1a, S2a = S1 | {top}, S2 | {top}
    only1 = sorted((S1a - S2a) | {top})
    only2 = sorted((S2a - S1a) | {top})
    common = S1a & S2a
    if len(S1 | S2) != inst.n + 1:
        raise ValueError("candidates_two expects every product to be offered; restrict first")
    out = set()
    for t1 in only1:
        for t2 in only2:
            S = set(common)
            S |= {j for j in S1a - S2a if j >= t1}
            S |= {j for j in S2a - S1a if j >= t2}
            S.discard(top)
            out.add(frozenset(S))
    return CandidateSet(tuple(sorted(out, key=to_mask)))


def is_candidate(inst: Instance, S) -> bool:
    S = set(S)
    if 0 not in S:
        return False
    offers = inst.offer_sets()
    r = inst.revenues
    for a in S:
        for b in range(inst.n + 1):
            if b not in S and r[a] < r[b] and offers[a] <= offers[b]:
                return False
    return True


def candidate_count_bound(n: int, M: int) -> int:
    return (n + 2) ** (2**M)

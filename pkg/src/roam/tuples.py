"""Tuple graphs, the feasible tuple set and worst/best revenue per tuple.

A tuple (i_1, ..., i_M) lists one purchased product per past assortment.
Its graph has an edge i -> i_m for every m and every i in S_m other than
i_m (a customer producing the tuple prefers i_m to i).  The tuple can be
produced by some ranking exactly when this graph is acyclic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import EmptyMinimum, ExplosionGuard, NotNested, NotTwoAssortments, TupleOutOfSupport
from .instance import Instance, classify_structure, nested_order

DEFAULT_CAP = 10**7

Tup = Tuple[int, ...]


class TupleGraph:
    def __init__(self, tup: Sequence[int], past: Sequence[FrozenSet[int]]):
        check_support(tup, past)
        self.tuple = tuple(tup)
        self.past = past
        self.succ: Dict[int, set] = {}
        self.pred: Dict[int, set] = {}
        for S, top in zip(past, tup):
            for i in S:
                if i != top:
                    self.succ.setdefault(i, set()).add(top)
                    self.pred.setdefault(top, set()).add(i)

    def vertices(self):
        out = set()
        for S in self.past:
            out |= S
        return out

    def is_acyclic(self) -> bool:
        ts = TopologicalSorter({v: self.pred.get(v, ()) for v in self.vertices()})
        try:
            ts.prepare()
        except CycleError:
            return False
        return True

    def ancestors(self, v: int) -> set:
        """Vertices with a directed path to v."""
        seen = set()
        stack = [v]
        while stack:
            u = stack.pop()
            for w in self.pred.get(u, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def topological_order(self) -> List[int]:
        return list(TopologicalSorter({v: self.pred.get(v, ()) for v in self.vertices()}).static_order())


def check_support(tup, past):
    if len(tup) != len(past):
        raise TupleOutOfSupport(f"tuple has {len(tup)} entries for {len(past)} assortments")
    for m, (i, S) in enumerate(zip(tup, past)):
        if i not in S:
            raise TupleOutOfSupport(f"entry {m + 1} ({i}) is not in its assortment")


def is_feasible_tuple(tup: Sequence[int], past: Sequence[FrozenSet[int]]) -> bool:
    return TupleGraph(tup, past).is_acyclic()


@dataclass
class FeasibleTupleSet:
    tuples: List[Tup]
    by_choice: Dict[Tuple[int, int], List[int]] = field(default_factory=dict)  # (m 0-based, i) -> tuple indices
    method: str = "general"

    def __post_init__(self):
        if not self.by_choice:
            for k, t in enumerate(self.tuples):
                for m, i in enumerate(t):
                    self.by_choice.setdefault((m, i), []).append(k)

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def as_set(self):
        return set(self.tuples)


def _general_tuples(past, cap) -> List[Tup]:
    size = math.prod(len(S) for S in past)
    if size > cap:
        raise ExplosionGuard(f"|S_1 x ... x S_M| = {size} exceeds cap {cap}")
    M = len(past)
    ordered = [sorted(S) for S in past]
    out: List[Tup] = []
    # out-edges of a vertex in the partial graph: earlier choices i_k with v in S_k
    chosen: List[int] = []

    def reach(start):
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for k, top in enumerate(chosen):
                if top != u and u in past[k] and top not in seen:
                    seen.add(top)
                    stack.append(top)
        return seen

    def extend(m):
        if m == M:
            out.append(tuple(chosen))
            return
        S = past[m]
        for i in ordered[m]:
            # new edges j -> i for j in S \ {i}; a cycle needs a path from i back into S
            r = reach(i)
            r.discard(i)
            if r & S:
                continue
            chosen.append(i)
            extend(m + 1)
            chosen.pop()

    extend(0)
    return out


def two_tuples(S1, S2) -> List[Tup]:
    """Closed form for two assortments."""
    A = S1 - S2
    B = S2 - S1
    C = S1 & S2
    out = set()
    for a in A:
        for j in S2:
            out.add((a, j))
    for i in S1:
        for b in B:
            out.add((i, b))
    for c in C:
        out.add((c, c))
    return sorted(out)


def blocks_of(past) -> List[FrozenSet[int]]:
    out = []
    prev = frozenset()
    for S in past:
        out.append(frozenset(S - prev))
        prev = S
    return out


def nested_tuples(past, cap=DEFAULT_CAP) -> List[Tup]:
    """Closed form for a strict chain: i_{m+1} is i_m or a newly added product."""
    for a, b in zip(past, past[1:]):
        if not a < b:
            raise NotNested("assortments are not a strict chain in the given order")
    B = blocks_of(past)
    size = len(B[0]) * math.prod(1 + len(b) for b in B[1:])
    if size > cap:
        raise ExplosionGuard(f"|L| = {size} exceeds cap {cap}")
    out = [(i,) for i in sorted(B[0])]
    for b in B[1:]:
        out = [t + (j,) for t in out for j in [t[-1]] + sorted(b)]
    return sorted(out)


def build_feasible_tuples(inst: Instance, cap: int = DEFAULT_CAP, method: str = "auto") -> FeasibleTupleSet:
    past = inst.past_assortments
    if method == "auto":
        if inst.M == 2:
            method = "two"
        elif nested_order(past) == tuple(range(inst.M)):
            method = "nested"
        else:
            method = "general"
    if method == "two":
        if inst.M != 2:
            raise NotTwoAssortments("closed form needs exactly two assortments")
        tuples = two_tuples(*past)
        if len(tuples) > cap:
            raise ExplosionGuard(f"|L| = {len(tuples)} exceeds cap {cap}")
    elif method == "nested":
        tuples = nested_tuples(past, cap)
    elif method == "general":
        tuples = _general_tuples(past, cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FeasibleTupleSet(tuples, method=method)


# -- revenue of a tuple under an assortment ---------------------------------

def admissible(tup: Sequence[int], S: Iterable[int], past) -> List[int]:
    """Products of S that some ranking producing the tuple would buy from S.

    A product is excluded when it has a directed path to some i_m in S,
    since that i_m is then preferred to it.
    """
    g = TupleGraph(tup, past)
    S = set(S)
    marked = set()
    for top in set(tup) & S:
        if top in marked:
            # ancestors of a marked vertex are already marked
            continue
        marked |= g.ancestors(top)
    out = sorted(S - marked)
    return out


def rho(tup: Sequence[int], S: Iterable[int], past, revenues, best: bool = False) -> float:
    """Lowest (or with best=True highest) revenue S can earn from the tuple."""
    cand = admissible(tup, S, past)
    if not cand:
        raise EmptyMinimum(f"no admissible product for tuple {tuple(tup)}")
    vals = [revenues[i] for i in cand]
    return float(max(vals) if best else min(vals))


def _min_over(items, revenues) -> Optional[float]:
    vals = [revenues[j] for j in items]
    return min(vals) if vals else None


def _min_present(*vals) -> float:
    present = [v for v in vals if v is not None]
    if not present:
        raise EmptyMinimum("minimum over an empty set")
    return float(min(present))


def rho_two(tup: Sequence[int], S: Iterable[int], S1, S2, revenues) -> float:
    """Case table for two assortments.

    Products of S offered in neither assortment are never dominated, so
    they enter the minimum directly.
    """
    i1, i2 = tup
    S = set(S)
    A = S1 - S2
    B = S2 - S1
    C = S1 & S2
    if i1 not in S1 or i2 not in S2:
        raise TupleOutOfSupport(f"{tuple(tup)} is outside S1 x S2")
    outside = _min_over(S - (S1 | S2), revenues)
    r = revenues
    min_SA = _min_over(S & A, revenues)
    min_SB = _min_over(S & B, revenues)
    if i1 in C and i2 in C:
        if i1 != i2:
            raise TupleOutOfSupport(f"{tuple(tup)} is not a feasible tuple")
        core = r[i1] if i1 in S else r[0]
    elif i1 in C and i2 in B:
        if i2 in S:
            core = r[i2]
        elif i1 in S:
            core = _min_present(r[i1], min_SB)
        else:
            core = r[0]
    elif i1 in A and i2 in C:
        if i1 in S:
            core = r[i1]
        elif i2 in S:
            core = _min_present(r[i2], min_SA)
        else:
            core = r[0]
    else:  # i1 in A, i2 in B
        if i1 in S and i2 in S:
            core = min(r[i1], r[i2])
        elif i1 in S:
            core = _min_present(r[i1], min_SB)
        elif i2 in S:
            core = _min_present(r[i2], min_SA)
        else:
            core = r[0]
    return _min_present(core, outside)


def rho_nested_prefix(tup: Sequence[int], S: Iterable[int], past, revenues) -> List[float]:
    """Worst revenue from S intersected with each prefix assortment of a chain."""
    for a, b in zip(past, past[1:]):
        if not a < b:
            raise NotNested("assortments are not a strict chain in the given order")
    S = set(S)
    B = blocks_of(past)
    if not S & past[0]:
        raise EmptyMinimum("S does not meet the first assortment")
    out: List[float] = []
    prev: Optional[float] = None
    for m, (i, b) in enumerate(zip(tup, B)):
        if i in S:
            cur = float(revenues[i])
        else:
            cur = _min_present(_min_over(b & S, revenues), prev)
        out.append(cur)
        prev = cur
    return out


# -- bitmask profiles for repeated evaluation --------------------------------

def ancestor_masks(tup: Sequence[int], past) -> List[Tuple[int, int]]:
    """For each distinct top product of the tuple: (top, mask of its ancestors)."""
    g = TupleGraph(tup, past)
    out = []
    for top in sorted(set(tup)):
        mask = 0
        for a in g.ancestors(top):
            mask |= 1 << a
        out.append((top, mask))
    return out


class RhoTable:
    """Admissible product sets of every tuple, evaluated with bit operations."""

    def __init__(self, tuples: Sequence[Tup], past):
        self.tuples = list(tuples)
        self.profiles = [ancestor_masks(t, past) for t in self.tuples]

    def admissible_mask(self, k: int, S_mask: int) -> int:
        marked = 0
        for top, anc in self.profiles[k]:
            if S_mask >> top & 1:
                marked |= anc
        return S_mask & ~marked

    def values(self, S_mask: int, revenues, best: bool = False) -> List[float]:
        """rho per tuple; revenues may be any vector (not necessarily sorted)."""
        out = []
        for k in range(len(self.tuples)):
            adm = self.admissible_mask(k, S_mask)
            if not adm:
                raise EmptyMinimum(f"no admissible product for tuple {self.tuples[k]}")
            vals = []
            while adm:
                low = adm & -adm
                vals.append(revenues[low.bit_length() - 1])
                adm ^= low
            out.append(float(max(vals) if best else min(vals)))
        return out

    def values_sorted(self, S_mask: int, revenues, best: bool = False) -> List[float]:
        """Fast path when revenues ascend with the product index."""
        out = []
        for k in range(len(self.tuples)):
            adm = self.admissible_mask(k, S_mask)
            if not adm:
                raise EmptyMinimum(f"no admissible product for tuple {self.tuples[k]}")
            idx = adm.bit_length() - 1 if best else (adm & -adm).bit_length() - 1
            out.append(float(revenues[idx]))
        return out

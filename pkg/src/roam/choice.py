"""Ranking-based choice models."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from .errors import InvalidInstance, TooLarge

WEIGHT_TOL = 1e-9
MAX_ENUM_N = 8

Ranking = Tuple[int, ...]  # sigma[i] = rank of product i, lower is preferred


def check_ranking(sigma: Sequence[int]) -> Ranking:
    sigma = tuple(int(x) for x in sigma)
    if sorted(sigma) != list(range(len(sigma))):
        raise InvalidInstance(f"{sigma} is not a permutation")
    return sigma


def ranking_from_order(order: Sequence[int], n: int) -> Ranking:
    """Ranking that prefers the listed products in order, then the rest by index."""
    order = list(order)
    rest = [i for i in range(n + 1) if i not in set(order)]
    sigma = [0] * (n + 1)
    for rank, i in enumerate(order + rest):
        sigma[i] = rank
    return check_ranking(sigma)


def preference_order(sigma: Ranking) -> List[int]:
    return sorted(range(len(sigma)), key=sigma.__getitem__)


@dataclass(frozen=True)
class RankingModel:
    atoms: Tuple[Tuple[Ranking, float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise InvalidInstance("a ranking model needs at least one atom")
        sizes = {len(s) for s, _ in self.atoms}
        if len(sizes) != 1:
            raise InvalidInstance("rankings must share the same product count")
        seen = set()
        for s, w in self.atoms:
            check_ranking(s)
            if not w > 0:
                raise InvalidInstance("atom weights must be positive")
            if s in seen:
                raise InvalidInstance("rankings must be distinct")
            seen.add(s)
        total = sum(w for _, w in self.atoms)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidInstance(f"weights sum to {total}")

    @property
    def n(self) -> int:
        return len(self.atoms[0][0]) - 1

    @classmethod
    def from_weights(cls, pairs: Iterable[Tuple[Sequence[int], float]], drop_below=0.0) -> "RankingModel":
        """Merge duplicate rankings, drop tiny weights and renormalize."""
        acc: Dict[Ranking, float] = {}
        for s, w in pairs:
            s = check_ranking(s)
            acc[s] = acc.get(s, 0.0) + float(w)
        acc = {s: w for s, w in acc.items() if w > drop_below}
        total = sum(acc.values())
        return cls(tuple((s, w / total) for s, w in sorted(acc.items())))

    @classmethod
    def from_orders(cls, orders: Iterable[Tuple[Sequence[int], float]], n: int) -> "RankingModel":
        return cls.from_weights((ranking_from_order(o, n), w) for o, w in orders)

    def to_dict(self) -> dict:
        return {"atoms": [{"sigma": list(s), "weight": w} for s, w in self.atoms]}

    @classmethod
    def from_dict(cls, data: dict) -> "RankingModel":
        return cls(tuple((check_ranking(a["sigma"]), float(a["weight"])) for a in data["atoms"]))


def top_choice(sigma: Sequence[int], S: Iterable[int]) -> int:
    return min(S, key=lambda i: sigma[i])


def demand(model: RankingModel, S: Iterable[int], n: int = None) -> np.ndarray:
    """Purchase probabilities over products 0..n when S is offered."""
    S = list(S)
    size = (model.n if n is None else n) + 1
    out = np.zeros(size)
    for sigma, w in model.atoms:
        out[top_choice(sigma, S)] += w
    return out


def _revenue_vector(revenues, n: int) -> np.ndarray:
    r = np.asarray(revenues, dtype=float)
    if len(r) == n:
        r = np.concatenate([[0.0], r])
    if len(r) != n + 1:
        raise InvalidInstance("revenue vector has the wrong length")
    return r


def expected_revenue(model: RankingModel, revenues, S: Iterable[int]) -> float:
    r = _revenue_vector(revenues, model.n)
    return float(r @ demand(model, S))


def consistency_residual(model: RankingModel, inst) -> Tuple[Dict[Tuple[int, int], float], float]:
    """Residuals D_i(S_m) - v_{m,i} keyed by (m, i) with 1-based m, plus their norm."""
    eps = {}
    for m, S in enumerate(inst.past_assortments):
        d = demand(model, S, inst.n)
        for i in sorted(S):
            eps[(m + 1, i)] = float(d[i] - inst.v(m, i))
    vals = np.abs(np.fromiter(eps.values(), dtype=float))
    size = float(vals.sum()) if inst.norm == "l1" else float(vals.max(initial=0.0))
    return eps, size


def is_consistent(model: RankingModel, inst, tol: float = 1e-9) -> bool:
    return consistency_residual(model, inst)[1] <= inst.eta + tol


def enumerate_rankings(n: int) -> Iterator[Ranking]:
    """All (n+1)! rankings in lexicographic order of their rank arrays."""
    if n > MAX_ENUM_N:
        raise TooLarge(f"refusing to enumerate {math.factorial(n + 1)} rankings")
    return itertools.permutations(range(n + 1))


def unrank_permutation(index: int, size: int) -> Ranking:
    """The index-th permutation of range(size) in lexicographic order."""
    items = list(range(size))
    out = []
    for k in range(size, 0, -1):
        f = math.factorial(k - 1)
        q, index = divmod(index, f)
        out.append(items.pop(q))
    return tuple(out)

"""Random and constructed instances.

Every generator is deterministic given its seed.  Simulation kinds draw a
ground-truth ranking model and record its exact purchase frequencies, so
the truth is consistent with the data at eta = 0.
"""
from __future__ import annotations

import math
import random
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .choice import RankingModel, demand, enumerate_rankings, unrank_permutation
from .errors import BadParams
from .instance import Instance, make_instance

KINDS = ("revordered", "two", "nested", "adversarial", "general", "fig6")
FIG6_FAMILIES = ("a", "b", "c")


def make_rng(seed) -> np.random.Generator:
    """PCG64 stream from an int or a sequence of ints (e.g. (master, rep))."""
    if isinstance(seed, np.random.Generator):
        return seed
    entropy = list(seed) if isinstance(seed, (tuple, list)) else seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def simplex_weights(rng, size) -> np.ndarray:
    """Uniform draw on the probability simplex: log(u_k) / sum log(u)."""
    u = rng.random(size)
    while np.any(u == 0.0):
        u = np.where(u == 0.0, rng.random(size), u)
    logs = np.log(u)
    return logs / logs.sum()


def floyd_sample(population: int, k: int, rnd: random.Random) -> List[int]:
    """k distinct integers from range(population), uniform over k-subsets."""
    if not 0 <= k <= population:
        raise BadParams(f"cannot draw {k} distinct items from {population}")
    chosen = set()
    for j in range(population - k, population):
        t = rnd.randrange(j + 1)
        chosen.add(j if t in chosen else t)
    return sorted(chosen)


def uniform_revenues(rng, n) -> List[float]:
    while True:
        r = rng.random(n)
        if np.all(r > 0) and len(set(r.tolist())) == n:
            return sorted(r.tolist())


def integer_revenues(rng, n, high=10000) -> List[float]:
    if n > high:
        raise BadParams(f"cannot draw {n} distinct revenues from 1..{high}")
    while True:
        r = rng.integers(1, high + 1, size=n)
        if len(set(r.tolist())) == n:
            return [float(x) for x in sorted(r.tolist())]


def full_model(rng, n) -> RankingModel:
    rankings = list(enumerate_rankings(n))
    w = simplex_weights(rng, len(rankings))
    return RankingModel.from_weights(list(zip(rankings, w)))


def sparse_model(rng, n, k) -> RankingModel:
    total = math.factorial(n + 1)
    if k < 1 or k > total:
        raise BadParams(f"k={k} must lie in 1..{total}")
    # (n+1)! overflows numpy integers quickly, so draw indices with Python ints
    rnd = random.Random(int(rng.integers(0, 2**63 - 1)))
    picks = floyd_sample(total, k, rnd)
    w = simplex_weights(rng, k)
    return RankingModel.from_weights([(unrank_permutation(p, n + 1), x) for p, x in zip(picks, w)])


def sales_of(model: RankingModel, past, n) -> List[Dict[int, float]]:
    out = []
    for S in past:
        d = demand(model, S, n)
        out.append({i: float(d[i]) for i in sorted(S)})
    return out


def _from_model(revenues, past, model, n) -> Instance:
    return make_instance(revenues, past, sales_of(model, past, n))


# -- kinds --------------------------------------------------------------------

def revordered(n, seed) -> Tuple[Instance, RankingModel]:
    """Past assortments {0, m, ..., n} for every m, full ranking support."""
    if n < 1:
        raise BadParams("n must be positive")
    rng = make_rng(seed)
    r = uniform_revenues(rng, n)
    model = full_model(rng, n)
    past = [[0] + list(range(m, n + 1)) for m in range(1, n + 1)]
    return _from_model(r, past, model, n), model


def two(n, k, seed) -> Tuple[Instance, RankingModel]:
    """Two random assortments sharing {0, n}, sparse ranking support."""
    if n < 3:
        raise BadParams("n must be at least 3 for two distinct assortments")
    rng = make_rng(seed)
    r = uniform_revenues(rng, n)
    while True:
        S1, S2 = {0, n}, {0, n}
        for j in range(1, n):
            side = int(rng.integers(0, 3))
            if side == 0:
                S1.add(j)
                S2.add(j)
            elif side == 1:
                S1.add(j)
            else:
                S2.add(j)
        if S1 != S2:  # identical sets would collapse into one assortment
            break
    model = sparse_model(rng, n, k)
    past = [sorted(S1), sorted(S2)]
    return _from_model(r, past, model, n), model


def nested_chain(rng, n, M) -> List[List[int]]:
    if not 1 <= M <= n:
        raise BadParams(f"M={M} must lie in 1..{n}")
    perm = (rng.permutation(n) + 1).tolist()
    cuts = sorted((rng.choice(n - 1, size=M - 1, replace=False) + 1).tolist()) if M > 1 else []
    past = [[0] + sorted(perm[:q]) for q in cuts]
    past.append(list(range(n + 1)))
    return past


def nested(n, M, k, seed) -> Tuple[Instance, RankingModel]:
    """Random chain ending in every product, integer revenues, sparse support."""
    if n < 1:
        raise BadParams("n must be positive")
    rng = make_rng(seed)
    r = integer_revenues(rng, n)
    past = nested_chain(rng, n, M)
    model = sparse_model(rng, n, k)
    return _from_model(r, past, model, n), model


def general(n, M, k, seed) -> Tuple[Instance, RankingModel]:
    """Arbitrary random past assortments (each holds 0 and at least one product)."""
    if n < 1 or M < 1:
        raise BadParams("n and M must be positive")
    rng = make_rng(seed)
    r = uniform_revenues(rng, n)
    past = []
    while len(past) < M:
        bits = rng.random(n) < 0.5
        S = [0] + [i + 1 for i in range(n) if bits[i]]
        if len(S) > 1 and S not in past:
            past.append(S)
        elif 2**n - 1 < M:
            raise BadParams(f"only {2**n - 1} distinct assortments exist for n={n}")
    model = sparse_model(rng, n, k)
    return _from_model(r, past, model, n), model


def reverse_chain(n) -> List[List[int]]:
    """{0, n}, {0, 1, n}, ..., {0, 1, ..., n}."""
    return [[0] + list(range(1, m)) + [n] for m in range(1, n + 1)]


def adversarial_sales(n, sbar) -> List[Dict[int, float]]:
    sbar = set(sbar)
    out = []
    for m in range(1, n + 1):
        later = set(range(m, n))
        s = {i: 1.0 / n for i in range(1, m)}
        s[0] = len(later & sbar) / n
        s[n] = (1 + len(later - sbar)) / n
        out.append({i: s[i] for i in sorted(s)})
    return out


def adversarial(n, sbar, revenues: Optional[Sequence[float]] = None) -> Instance:
    """Reverse-chain data built to favour sbar; see adversarial_tuples for the fitted weights."""
    sbar = set(sbar)
    if n < 2:
        raise BadParams("n must be at least 2")
    if not {0, n} <= sbar or not sbar <= set(range(n + 1)):
        raise BadParams(f"sbar must contain 0 and {n} and lie in 0..{n}")
    r = list(revenues) if revenues is not None else [float(i) for i in range(1, n + 1)]
    return make_instance(r, reverse_chain(n), adversarial_sales(n, sbar))


def adversarial_tuples(n, sbar) -> Dict[tuple, float]:
    """The unique consistent tuple weights of the adversarial data."""
    sbar = set(sbar)
    out = {}
    for j in range(1, n):
        head = 0 if j in sbar else n
        out[tuple([head] * j + [j] * (n - j))] = 1.0 / n
    out[tuple([n] * n)] = 1.0 / n
    return out


def fig6_family(name, n=None) -> List[List[int]]:
    """Past assortments of the three frontier families.

    a: {0,n}, {0,n-1,n}, ..., {0..n}
    b: {0,n}, {0,1,n}, ..., {0..n}
    c: five layers interleaved by residue mod 5 (any n >= 5)
    """
    if name == "a":
        n = 10 if n is None else n
        return [[0] + list(range(m, n + 1)) for m in range(n, 0, -1)]
    if name == "b":
        n = 10 if n is None else n
        return reverse_chain(n)
    if name == "c":
        n = 15 if n is None else n
        if n < 5:
            raise BadParams("family c needs n >= 5")
        # layer t adds the products whose residue mod 5 is the t-th entry
        past, cur = [], [0]
        for residue in (3, 0, 1, 4, 2):
            cur = sorted(cur + [i for i in range(1, n + 1) if i % 5 == residue])
            past.append(cur)
        return past
    raise BadParams(f"unknown family {name!r}")


def fig6(family, n, k, seed) -> Tuple[Instance, RankingModel]:
    past = fig6_family(family, n)
    n = max(max(S) for S in past)
    rng = make_rng(seed)
    r = integer_revenues(rng, n)
    model = sparse_model(rng, n, k)
    return _from_model(r, past, model, n), model


def generate_with_truth(kind, seed=0, **params) -> Tuple[Instance, Optional[RankingModel]]:
    try:
        if kind == "revordered":
            return revordered(params["n"], seed)
        if kind == "two":
            return two(params["n"], params.get("k", 10), seed)
        if kind == "nested":
            return nested(params["n"], params.get("m", 3), params.get("k", 80), seed)
        if kind == "general":
            return general(params["n"], params.get("m", 3), params.get("k", 10), seed)
        if kind == "fig6":
            return fig6(params.get("family", "a"), params.get("n"), params.get("k", 80), seed)
        if kind == "adversarial":
            n = params["n"]
            sbar = params.get("sbar", [0, n])
            return adversarial(n, sbar, params.get("revenues")), None
    except KeyError as exc:
        raise BadParams(f"missing parameter {exc.args[0]!r} for kind {kind!r}") from None
    raise BadParams(f"unknown kind {kind!r}; expected one of {KINDS}")


def generate(kind, seed=0, **params) -> Instance:
    return generate_with_truth(kind, seed, **params)[0]

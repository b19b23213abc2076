import math

import numpy as np

from roam import generators as gen
from roam.choice import RankingModel, ranking_from_order
from roam.instance import make_instance


def perturb(inst, seed, delta=0.005):
    """Shift delta of mass between two products of each past assortment."""
    rng = np.random.default_rng(seed)
    sales = []
    for S, s in zip(inst.past_assortments, inst.sales):
        s = dict(s)
        items = sorted(S)
        a, b = rng.choice(len(items), size=2, replace=False)
        move = min(delta, s[items[a]])
        s[items[a]] -= move
        s[items[b]] += move
        sales.append(s)
    r = list(inst.revenues[1:])
    return make_instance(r, [sorted(S) for S in inst.past_assortments], sales, eta=inst.eta, norm=inst.norm)


def cap_k(n, k):
    return min(k, math.factorial(n + 1))


def random_small(seed, n, M, eta=0.0, norm="linf", k=6):
    """General random instance; with eta > 0 the data is nudged off the truth."""
    inst = gen.generate("general", seed, n=n, m=min(M, 2**n - 1), k=cap_k(n, k))
    inst = inst.replace(eta=eta, norm=norm)
    if eta > 0:
        inst = perturb(inst, seed, delta=0.005)
    return inst


def random_nested(seed, n, M, k=20):
    return gen.generate("nested", seed, n=n, m=min(M, n), k=cap_k(n, k))


def estimated_model():
    """Five-ranking model that reproduces the four-product example data."""
    orders = [([0], 0.3), ([1, 2, 4, 0], 0.2), ([1, 4, 0], 0.1), ([2, 4, 0], 0.1), ([3, 4, 0], 0.3)]
    return RankingModel.from_weights([(ranking_from_order(o, 4), w) for o, w in orders])


def adverse_model():
    """Seven-ranking model that fits the same data but sells {0,4} poorly."""
    orders = [
        ([0], 0.2),
        ([1, 0], 0.1),
        ([2, 0], 0.1),
        ([3, 0], 0.1),
        ([4, 0], 0.1),
        ([1, 2, 0], 0.2),
        ([3, 4, 0], 0.2),
    ]
    return RankingModel.from_weights([(ranking_from_order(o, 4), w) for o, w in orders])

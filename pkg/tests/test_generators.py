import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roam import generators as gen
from roam.choice import consistency_residual
from roam.errors import BadParams
from roam.instance import classify_structure, past_revenue, Structure


def test_seed_determinism():
    a = gen.generate("two", 5, n=6, k=4)
    b = gen.generate("two", 5, n=6, k=4)
    c = gen.generate("two", 6, n=6, k=4)
    assert a.same_data(b)
    assert not a.same_data(c)


def test_tuple_seeds_are_independent_streams():
    x = gen.make_rng((1, 2)).random()
    y = gen.make_rng((1, 3)).random()
    assert x != y
    assert gen.make_rng((1, 2)).random() == x


def test_floyd_sample_is_uniform_on_subsets():
    rnd = random.Random(0)
    counts = Counter(tuple(gen.floyd_sample(5, 2, rnd)) for _ in range(20000))
    assert len(counts) == 10
    assert max(counts.values()) / min(counts.values()) < 1.2
    with pytest.raises(BadParams):
        gen.floyd_sample(3, 4, rnd)


def test_simplex_weights():
    w = gen.simplex_weights(gen.make_rng(0), 7)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(w > 0)
    # the mean of each coordinate is 1 / size
    many = np.array([gen.simplex_weights(gen.make_rng(s), 4) for s in range(4000)])
    assert many.mean(axis=0) == pytest.approx([0.25] * 4, abs=0.02)


def test_sparse_model_at_large_n():
    model = gen.sparse_model(gen.make_rng(1), 30, 5)
    assert len(model.atoms) == 5
    assert model.n == 30
    with pytest.raises(BadParams):
        gen.sparse_model(gen.make_rng(1), 2, 7)


@pytest.mark.parametrize("kind, params", [
    ("revordered", {"n": 4}),
    ("two", {"n": 6, "k": 5}),
    ("nested", {"n": 6, "m": 3, "k": 10}),
    ("general", {"n": 4, "m": 3, "k": 5}),
    ("fig6", {"family": "b", "n": 5, "k": 10}),
])
def test_generated_truth_fits(kind, params):
    inst, model = gen.generate_with_truth(kind, 7, **params)
    assert consistency_residual(model, inst)[1] <= 1e-9


def test_structure_of_kinds():
    assert classify_structure(gen.generate("revordered", 0, n=4)).kind is Structure.REVENUE_ORDERED_COMPLETE
    assert classify_structure(gen.generate("two", 0, n=5)).kind is Structure.TWO_ASSORTMENTS
    assert classify_structure(gen.generate("nested", 0, n=6, m=3, k=5)).is_nested
    for fam in gen.FIG6_FAMILIES:
        assert classify_structure(gen.generate("fig6", 0, family=fam, n=10, k=5)).is_nested


def test_fig6_family_layouts():
    assert gen.fig6_family("a", 3) == [[0, 3], [0, 2, 3], [0, 1, 2, 3]]
    assert gen.fig6_family("b", 3) == [[0, 3], [0, 1, 3], [0, 1, 2, 3]]
    c15 = gen.fig6_family("c", 15)
    assert c15[0] == [0, 3, 8, 13]
    assert len(c15) == 5 and c15[-1] == list(range(16))
    c10 = gen.fig6_family("c", 10)
    assert c10[0] == [0, 3, 8] and c10[1] == [0, 3, 5, 8, 10]
    with pytest.raises(BadParams):
        gen.fig6_family("c", 4)
    with pytest.raises(BadParams):
        gen.fig6_family("d")


def test_adversarial_sales_sum_to_one():
    for m, s in enumerate(gen.adversarial_sales(5, [0, 2, 5]), start=1):
        assert sum(s.values()) == pytest.approx(1.0)
        assert set(s) == set([0] + list(range(1, m)) + [5])


def test_bad_params():
    with pytest.raises(BadParams):
        gen.generate("two", 0, n=2)
    with pytest.raises(BadParams):
        gen.generate("nested", 0, n=3, m=5)
    with pytest.raises(BadParams):
        gen.generate("adversarial", 0, n=3, sbar=[0, 1])
    with pytest.raises(BadParams):
        gen.generate("spiral", 0, n=3)
    with pytest.raises(BadParams):
        gen.generate("two", 0)
    with pytest.raises(BadParams):
        gen.generate("general", 0, n=2, m=4)


@given(st.integers(0, 10**6), st.integers(3, 12))
def test_two_kind_shape(seed, n):
    inst = gen.generate("two", seed, n=n, k=3)
    S1, S2 = inst.past_assortments
    assert S1 != S2
    assert {0, n} <= S1 & S2
    assert len(set(inst.revenues)) == n + 1


@given(st.integers(0, 10**6), st.integers(1, 10), st.integers(1, 10))
def test_nested_kind_is_a_chain_ending_in_everything(seed, n, M):
    M = min(M, n)
    inst = gen.generate("nested", seed, n=n, m=M, k=2)
    chain = sorted(inst.past_assortments, key=len)
    assert chain[-1] == frozenset(range(n + 1))
    assert all(a < b for a, b in zip(chain, chain[1:]))
    assert all(r == int(r) and 1 <= r <= 10000 for r in inst.revenues[1:])


@given(st.integers(0, 10**6), st.integers(1, 6))
def test_revordered_past_revenue_bounded(seed, n):
    inst = gen.generate("revordered", seed, n=n)
    for m in range(1, n + 1):
        assert 0 <= past_revenue(inst, m) <= inst.r_max
    assert inst.M == n

import pytest
from hypothesis import given, strategies as st

from roam import generators as gen
from roam.candidates import enumerate_candidates
from roam.choice import consistency_residual, expected_revenue
from roam.errors import InconsistentData, NotApplicable
from roam.oracle import all_assortments, oracle_best_case, oracle_min_radius, oracle_worst_case
from roam.robust import (
    TupleEvaluator,
    best_case_revenue,
    min_consistency_radius,
    witness_model,
    worst_case_revenue,
    worst_case_two_flow,
)

from helpers import perturb, random_small

FOUR_WORST = {
    (0, 4): 30,
    (0, 1, 4): 33,
    (0, 2, 4): 36,
    (0, 3, 4): 19,
    (0, 1, 2, 4): 35,
    (0, 1, 3, 4): 12,
    (0, 2, 3, 4): 25,
    (0, 1, 2, 3, 4): 14,
}


@pytest.mark.parametrize("S, value", sorted(FOUR_WORST.items()))
def test_four_product_worst_case(four, S, value):
    assert worst_case_revenue(four, S).value == pytest.approx(value, abs=1e-6)
    assert oracle_worst_case(four, S) == pytest.approx(value, abs=1e-6)


def test_four_product_best_case_matches_oracle(four):
    for S in all_assortments(4):
        assert best_case_revenue(four, S).value == pytest.approx(oracle_best_case(four, S), abs=1e-6)


def test_assortment_without_zero_gets_it(four):
    assert worst_case_revenue(four, {2, 4}).value == pytest.approx(36.0)


def test_four_product_flow(four):
    for S in FOUR_WORST:
        for method in ("simplex", "ssp"):
            assert worst_case_two_flow(four, S, method).value == pytest.approx(FOUR_WORST[S], abs=1e-7)


def test_flow_needs_two_and_zero_radius(four):
    with pytest.raises(NotApplicable):
        worst_case_two_flow(four.replace(eta=0.1), {0, 4})
    with pytest.raises(NotApplicable):
        worst_case_two_flow(gen.generate("revordered", 0, n=3), {0, 3})


def test_witness_reproduces_worst_case(four):
    S = {0, 2, 4}
    val = worst_case_revenue(four, S)
    model = witness_model(four, S, val)
    assert consistency_residual(model, four)[1] <= 1e-9
    assert expected_revenue(model, four.revenues, S) == pytest.approx(36.0)


def test_min_radius_zero_on_consistent_data(four):
    assert min_consistency_radius(four) == pytest.approx(0.0, abs=1e-9)


def test_inconsistent_data_raises():
    # product 1 sells more when a rival is added: no ranking model fits
    from roam.instance import make_instance

    inst = make_instance([1, 2], [[0, 1], [0, 1, 2]], [[0.5, 0.5], [0.2, 0.7, 0.1]])
    radius = min_consistency_radius(inst)
    assert radius == pytest.approx(oracle_min_radius(inst), abs=1e-6)
    assert radius > 0
    with pytest.raises(InconsistentData):
        worst_case_revenue(inst, {0, 1})
    ok = inst.replace(eta=radius + 1e-9)
    assert worst_case_revenue(ok, {0, 1}).value <= best_case_revenue(ok, {0, 1}).value + 1e-9


seeds = st.integers(0, 10**6)


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.sampled_from([0.0, 0.05]), st.sampled_from(["l1", "linf"]))
def test_fast_matches_oracle(seed, n, M, eta, norm):
    inst = random_small(seed, n, M, eta=eta, norm=norm)
    for S in all_assortments(n):
        assert worst_case_revenue(inst, S).value == pytest.approx(oracle_worst_case(inst, S), abs=1e-6)
        assert best_case_revenue(inst, S).value == pytest.approx(oracle_best_case(inst, S), abs=1e-6)


@given(seeds, st.integers(1, 5), st.integers(1, 3))
def test_witness_is_consistent_and_attains_value(seed, n, M):
    inst = random_small(seed, n, M)
    for S in list(all_assortments(n))[:6]:
        for best in (False, True):
            val = best_case_revenue(inst, S) if best else worst_case_revenue(inst, S)
            model = witness_model(inst, S, val, best=best)
            assert consistency_residual(model, inst)[1] <= 1e-7
            assert expected_revenue(model, inst.revenues, S) == pytest.approx(val.value, abs=1e-7)


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.sampled_from(["l1", "linf"]))
def test_wider_ball_widens_range(seed, n, M, norm):
    inst = random_small(seed, n, M, norm=norm)
    for S in list(all_assortments(n))[:4]:
        lo, hi = worst_case_revenue(inst, S).value, best_case_revenue(inst, S).value
        wide = inst.replace(eta=0.1)
        assert worst_case_revenue(wide, S).value <= lo + 1e-9
        assert best_case_revenue(wide, S).value >= hi - 1e-9
        assert lo <= hi + 1e-9


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.sampled_from(["l1", "linf"]))
def test_min_radius_matches_oracle(seed, n, M, norm):
    inst = perturb(random_small(seed, n, M, norm=norm), seed, delta=0.05)
    assert min_consistency_radius(inst) == pytest.approx(oracle_min_radius(inst), abs=1e-5)


@given(seeds, st.integers(3, 20))
def test_two_flow_matches_lp(seed, n):
    inst = gen.generate("two", seed, n=n, k=10)
    for S in list(enumerate_candidates(inst))[:30]:
        want = worst_case_revenue(inst, S).value
        assert worst_case_two_flow(inst, S).value == pytest.approx(want, abs=1e-7)
        assert worst_case_two_flow(inst, S, "ssp").value == pytest.approx(want, abs=1e-7)


def test_highs_backend_agrees(four):
    ours = TupleEvaluator(four)
    ref = TupleEvaluator(four, backend="highs")
    for S in FOUR_WORST:
        assert ref.worst(S).value == pytest.approx(ours.worst(S).value, abs=1e-7)

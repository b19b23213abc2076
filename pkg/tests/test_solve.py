import pytest
from hypothesis import given, strategies as st

from roam import generators as gen
from roam.choice import consistency_residual, expected_revenue
from roam.errors import BadParams, NotApplicable, TooLarge
from roam.instance import best_past_revenue, make_instance, past_revenue
from roam.oracle import all_assortments, oracle_ro, oracle_worst_case
from roam.robust import best_case_revenue, worst_case_revenue
from roam.solve import choose_method, eto_baseline, estimate_model, pareto_sweep, solve_ro

from helpers import estimated_model, random_nested, random_small


def test_four_product_robust(four):
    rep = solve_ro(four)
    assert rep.method == "two_flow"
    assert rep.assortment == frozenset({0, 2, 4})
    assert rep.value == pytest.approx(36.0, abs=1e-6)
    assert rep.optima == [frozenset({0, 2, 4})]
    brute = solve_ro(four, method="brute")
    assert brute.assortment == rep.assortment
    assert brute.value == pytest.approx(rep.value)


def test_four_product_table_has_best(four):
    rep = solve_ro(four, with_best=True)
    for S, w, b in rep.table:
        assert w <= b + 1e-9
    d = rep.to_dict()
    assert d["assortment"] == [0, 2, 4]


def test_estimate_then_optimize_example(four):
    eto = eto_baseline(four, model=estimated_model())
    assert eto.assortment == frozenset({0, 4})
    assert expected_revenue(estimated_model(), four.revenues, {0, 4}) == pytest.approx(70.0)
    assert eto.worst == pytest.approx(30.0, abs=1e-6)
    assert eto.best >= 70.0 - 1e-6
    assert eto.best_past == pytest.approx(35.0)


def test_estimated_model_is_consistent(four):
    model = estimate_model(four, gen.make_rng(3))
    assert consistency_residual(model, four)[1] <= 1e-7


def test_estimate_guard():
    with pytest.raises(TooLarge):
        estimate_model(gen.generate("revordered", 0, n=7), gen.make_rng(0))


def test_method_guards(four):
    with pytest.raises(BadParams):
        solve_ro(four, method="fastest")
    with pytest.raises(NotApplicable):
        solve_ro(four, method="closed_form")
    with pytest.raises(NotApplicable):
        solve_ro(four.replace(eta=0.05), method="two_flow")


def test_choose_method(four):
    assert choose_method(four) == "two_flow"
    assert choose_method(four.replace(eta=0.05)) == "brute"
    assert choose_method(gen.generate("revordered", 0, n=4)) == "closed_form"
    assert choose_method(gen.adversarial(4, [0, 4])) == "nested_milp"


@pytest.mark.parametrize("n", [3, 4])
def test_adversarial_optimum_is_the_chosen_set(n):
    for sbar in all_assortments(n):
        if n not in sbar:
            continue
        inst = gen.adversarial(n, sorted(sbar))
        assert solve_ro(inst).value == pytest.approx(worst_case_revenue(inst, sbar).value, abs=1e-6)


def test_adversarial_data_can_leave_a_better_set():
    # a customer who ranks 1 above 2 above 4 never reveals 2 versus 4, so sbar only ties
    inst = gen.adversarial(4, [0, 2, 4])
    assert oracle_worst_case(inst, {0, 2, 4}) == pytest.approx(3.0, abs=1e-9)
    assert oracle_worst_case(inst, {0, 4}) == pytest.approx(3.0, abs=1e-9)
    inst = gen.adversarial(4, [0, 2, 4], [1, 1.5, 3, 4])
    assert oracle_worst_case(inst, {0, 2, 4}) == pytest.approx(2.75, abs=1e-9)
    assert oracle_worst_case(inst, {0, 4}) == pytest.approx(3.0, abs=1e-9)


def test_unoffered_products_keep_labels():
    inst = make_instance([10, 20, 30, 100, 200], [[0, 2, 3, 4], [0, 1, 2, 4]],
                         [[0.3, 0.3, 0.3, 0.1], [0.3, 0.3, 0.1, 0.3]])
    rep = solve_ro(inst)
    assert rep.value == pytest.approx(36.0, abs=1e-6)
    assert rep.assortment == frozenset({0, 2, 4})


def test_pareto_four_product(four):
    pts = pareto_sweep(four, 11)
    assert pts[-1].worst_case == pytest.approx(36.0, abs=1e-6)
    top = max(best_case_revenue(four, S).value for S in all_assortments(4))
    assert pts[0].best_case == pytest.approx(top, abs=1e-6)
    worst, best = pts[0].improvement
    assert best == pytest.approx((pts[0].best_case - 35.0) / 35.0 * 100)


def test_pareto_grid_errors(four):
    with pytest.raises(BadParams):
        pareto_sweep(four, 1)
    with pytest.raises(BadParams):
        pareto_sweep(four, [0.5, 1.5])
    with pytest.raises(BadParams):
        pareto_sweep(four, 3, method="heuristic")


seeds = st.integers(0, 10**6)


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.sampled_from([0.0, 0.05]), st.sampled_from(["l1", "linf"]))
def test_solve_matches_oracle(seed, n, M, eta, norm):
    inst = random_small(seed, n, M, eta=eta, norm=norm)
    winners, value = oracle_ro(inst)
    rep = solve_ro(inst)
    assert rep.value == pytest.approx(value, abs=1e-6)
    assert rep.assortment in winners
    assert rep.assortment == min(rep.optima, key=lambda S: sum(1 << i for i in S))


@given(seeds, st.integers(2, 6))
def test_closed_form_revenue_ordered(seed, n):
    inst = gen.generate("revordered", seed, n=n)
    rep = solve_ro(inst)
    assert rep.method == "closed_form"
    assert rep.value == pytest.approx(max(past_revenue(inst, m) for m in range(1, inst.M + 1)), abs=1e-9)
    assert solve_ro(inst, method="brute").value == pytest.approx(rep.value, abs=1e-6)


@given(seeds, st.integers(1, 6), st.integers(1, 4))
def test_nested_milp_matches_brute(seed, n, M):
    inst = random_nested(seed, n, M, k=10)
    assert solve_ro(inst, method="nested_milp").value == pytest.approx(solve_ro(inst, method="brute").value, abs=1e-6)


@given(seeds, st.integers(3, 8))
def test_two_flow_matches_brute(seed, n):
    inst = gen.generate("two", seed, n=n, k=6)
    assert solve_ro(inst, method="two_flow").value == pytest.approx(solve_ro(inst, method="brute").value, abs=1e-7)


@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_past_assortments_keep_their_revenue(seed, n, M):
    inst = random_small(seed, n, M)
    # every past assortment has worst case equal to its observed revenue
    for m, S in enumerate(inst.past_assortments, start=1):
        assert worst_case_revenue(inst, S).value == pytest.approx(past_revenue(inst, m), abs=1e-7)
    assert solve_ro(inst).value >= best_past_revenue(inst) - 1e-7


@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_pareto_frontier_monotone(seed, n, M):
    inst = random_small(seed, n, M)
    pts = pareto_sweep(inst, 6, dedupe=False)
    for a, b in zip(pts, pts[1:]):
        assert b.worst_case >= a.worst_case - 1e-9
        assert b.best_case <= a.best_case + 1e-9
    assert pts[-1].worst_case == pytest.approx(solve_ro(inst).value, abs=1e-6)

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roam.errors import GuardExceeded
from roam.opt import (
    INF,
    FlowNetwork,
    LPModel,
    MILPModel,
    SolveStatus,
    dual_model,
    linearize_norm_ball,
    solve_lp,
    solve_milp,
    solve_min_cost_flow,
)


def small_lp():
    # max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 9,  x <= 3
    lp = LPModel("max")
    x = lp.add_var(0, 3, 3.0)
    y = lp.add_var(0, INF, 2.0)
    lp.add_row({x: 1, y: 1}, "<=", 4)
    lp.add_row({x: 1, y: 3}, "<=", 9)
    return lp


def test_small_lp():
    sol = solve_lp(small_lp())
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.value == pytest.approx(11.0)
    assert sol.x == pytest.approx([3.0, 1.0])
    assert sol.duals == pytest.approx([2.0, 0.0])


def test_equality_and_ge_rows():
    # min x + 2y + 3z  s.t.  x + y + z = 1,  y + z >= 0.5
    lp = LPModel("min")
    v = lp.add_vars(3, obj=0.0)
    for j, c in zip(v, [1, 2, 3]):
        lp.set_obj(j, c)
    lp.add_row({j: 1 for j in v}, "=", 1)
    lp.add_row({v[1]: 1, v[2]: 1}, ">=", 0.5)
    sol = solve_lp(lp)
    assert sol.value == pytest.approx(1.5)
    assert sol.x == pytest.approx([0.5, 0.5, 0.0])


def test_free_variable():
    lp = LPModel("min")
    x = lp.add_var(-INF, INF, 1.0)
    lp.add_row({x: 1}, ">=", -2.5)
    assert solve_lp(lp).value == pytest.approx(-2.5)


def test_infeasible_and_unbounded():
    lp = LPModel("min")
    x = lp.add_var(0, 1, 1.0)
    lp.add_row({x: 1}, ">=", 2)
    assert solve_lp(lp).status is SolveStatus.INFEASIBLE
    lp = LPModel("max")
    x = lp.add_var(0, INF, 1.0)
    y = lp.add_var(0, INF, 0.0)
    lp.add_row({x: 1, y: -1}, "<=", 1)
    assert solve_lp(lp).status is SolveStatus.UNBOUNDED


def test_no_rows():
    lp = LPModel("max")
    lp.add_var(0, 2, 1.0)
    lp.add_var(-1, 1, -1.0)
    sol = solve_lp(lp)
    assert sol.value == pytest.approx(3.0)
    lp.add_var(0, INF, 1.0)
    assert solve_lp(lp).status is SolveStatus.UNBOUNDED


def test_model_validation():
    lp = LPModel()
    with pytest.raises(ValueError):
        lp.add_var(1, 0)
    with pytest.raises(ValueError):
        lp.add_row({0: 1}, "<", 0)
    with pytest.raises(ValueError):
        LPModel("maximize")
    with pytest.raises(ValueError):
        solve_lp(lp, backend="cplex")


def test_iteration_limit_status():
    lp = small_lp()
    assert solve_lp(lp, max_iter=0).status is SolveStatus.ITERATION_LIMIT


def random_lp(seed, rows=6, cols=8):
    """Feasible bounded LP: a known interior point and a box on every variable."""
    rng = np.random.default_rng(seed)
    lp = LPModel(rng.choice(["min", "max"]))
    x0 = rng.uniform(0, 1, cols)
    for j in range(cols):
        lo = -rng.uniform(0, 2) if rng.random() < 0.3 else 0.0
        lp.add_var(lo, float(rng.uniform(1, 3)), float(rng.normal()))
    for _ in range(rows):
        a = rng.normal(size=cols) * (rng.random(cols) < 0.6)
        s = rng.choice(["<=", ">=", "="])
        b = float(a @ x0)
        slack = 0.0 if s == "=" else float(rng.uniform(0, 1))
        lp.add_row({j: a[j] for j in range(cols)}, s, b + slack if s == "<=" else b - slack)
    return lp


seeds = st.integers(0, 10**6)


@given(seeds, st.integers(1, 10), st.integers(1, 12))
def test_builtin_matches_highs(seed, rows, cols):
    lp = random_lp(seed, rows, cols)
    ours = solve_lp(lp)
    ref = solve_lp(lp, backend="highs")
    assert ours.status is SolveStatus.OPTIMAL and ref.status is SolveStatus.OPTIMAL
    assert ours.value == pytest.approx(ref.value, abs=1e-6)
    assert lp.max_violation(ours.x) <= 1e-7


@given(seeds, st.integers(1, 8), st.integers(1, 10))
def test_strong_duality(seed, rows, cols):
    lp = random_lp(seed, rows, cols)
    if lp.sense == "max":
        lp.sense = "min"
        lp.obj = [-c for c in lp.obj]
    primal = solve_lp(lp)
    dual = solve_lp(dual_model(lp))
    assert dual.status is SolveStatus.OPTIMAL
    assert dual.value == pytest.approx(primal.value, abs=1e-6)


@given(seeds, st.integers(2, 10), st.integers(2, 12))
def test_warm_start_matches_cold(seed, rows, cols):
    lp = random_lp(seed, rows, cols)
    first = solve_lp(lp)
    rng = np.random.default_rng(seed + 1)
    j = int(rng.integers(cols))
    lp.ub[j] = max(lp.lb[j], first.x[j] - 0.3)
    lp.obj = list(np.asarray(lp.obj) + rng.normal(scale=0.1, size=cols))
    warm = solve_lp(lp, warm=first.warm)
    cold = solve_lp(lp)
    assert warm.status is cold.status
    if cold.optimal:
        assert warm.value == pytest.approx(cold.value, abs=1e-7)


@pytest.mark.parametrize("norm, eta, want", [("linf", 0.1, 0.4), ("l1", 0.1, 0.1), ("linf", 0.0, 0.0), ("l1", 0.0, 0.0)])
def test_norm_ball(norm, eta, want):
    lp = LPModel("max")
    eps = [lp.add_var(-INF, INF, 1.0) for _ in range(4)]
    linearize_norm_ball(lp, eps, norm, eta)
    sol = solve_lp(lp)
    assert sol.value == pytest.approx(want)
    # the ball is symmetric
    lp.obj = [-c for c in lp.obj]
    assert solve_lp(lp).value == pytest.approx(want)


def test_norm_ball_errors():
    lp = LPModel()
    x = lp.add_var()
    with pytest.raises(ValueError):
        linearize_norm_ball(lp, [x], "l2", 0.1)
    with pytest.raises(ValueError):
        linearize_norm_ball(lp, [x], "l1", -0.1)


def transport():
    net = FlowNetwork()
    s1 = net.add_node(3)
    s2 = net.add_node(2)
    d1 = net.add_node(-4)
    d2 = net.add_node(-1)
    net.add_arc(s1, d1, 1)
    net.add_arc(s1, d2, 4)
    net.add_arc(s2, d1, 3)
    net.add_arc(s2, d2, 2)
    return net


def test_transport_example():
    for method in ("ssp", "simplex"):
        sol = solve_min_cost_flow(transport(), method)
        assert sol.value == pytest.approx(3 * 1 + 1 * 3 + 1 * 2)


def test_flow_rejects_unbalanced():
    net = transport()
    net.supply[0] += 1
    with pytest.raises(ValueError):
        solve_min_cost_flow(net)
    with pytest.raises(ValueError):
        solve_min_cost_flow(transport(), "auction")


def random_network(seed, nodes):
    """Forward arcs may be negative; backward arcs cost more than any forward path saves."""
    rng = np.random.default_rng(seed)
    net = FlowNetwork()
    supply = rng.uniform(-1, 1, nodes)
    supply[-1] -= supply.sum()
    for v in range(nodes):
        net.add_node(float(supply[v]))
    order = rng.permutation(nodes)
    for a, b in itertools.combinations(range(nodes), 2):
        if rng.random() < 0.5 or b == a + 1:
            net.add_arc(int(order[a]), int(order[b]), float(rng.uniform(-1, 3)))
            net.add_arc(int(order[b]), int(order[a]), float(rng.uniform(nodes, nodes + 4)))
    return net


@given(seeds, st.integers(2, 12))
def test_flow_routes_agree(seed, nodes):
    net = random_network(seed, nodes)
    ssp = solve_min_cost_flow(net, "ssp")
    lp = solve_min_cost_flow(net, "simplex")
    ref = solve_lp(net.to_lp(), backend="highs")
    assert ssp.value == pytest.approx(ref.value, abs=1e-7)
    assert lp.value == pytest.approx(ref.value, abs=1e-7)
    assert net.to_lp().max_violation(ssp.x) <= 1e-9


def knapsack():
    m = MILPModel("max")
    w = [5, 4, 3]
    v = [10, 40, 30]
    xs = [m.add_binary(val) for val in v]
    m.add_row({x: wi for x, wi in zip(xs, w)}, "<=", 7)
    return m


def test_knapsack():
    sol = solve_milp(knapsack())
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.value == pytest.approx(70.0)
    assert sol.x == pytest.approx([0, 1, 1])
    assert solve_milp(knapsack(), backend="highs").value == pytest.approx(70.0)


def test_milp_infeasible():
    m = MILPModel()
    x = m.add_binary(1.0)
    y = m.add_binary(1.0)
    m.add_row({x: 1, y: 1}, "=", 1.5)
    assert solve_milp(m).status is SolveStatus.INFEASIBLE


def test_binary_guard():
    m = MILPModel()
    for _ in range(33):
        m.add_binary(1.0)
    with pytest.raises(GuardExceeded):
        solve_milp(m)


def random_milp(seed, nb, nc):
    rng = np.random.default_rng(seed)
    m = MILPModel(rng.choice(["min", "max"]))
    xs = [m.add_binary(float(rng.normal())) for _ in range(nb)]
    zs = [m.add_var(0, float(rng.uniform(1, 2)), float(rng.normal())) for _ in range(nc)]
    cols = xs + zs
    for _ in range(int(rng.integers(1, 5))):
        a = rng.normal(size=len(cols))
        m.add_row({j: a[k] for k, j in enumerate(cols)}, "<=", float(rng.uniform(0, 2)))
    return m, xs


def brute_force(m, xs):
    best = None
    for bits in itertools.product([0, 1], repeat=len(xs)):
        lp = m.copy()
        for j, b in zip(xs, bits):
            lp.lb[j] = lp.ub[j] = float(b)
        sol = solve_lp(lp, backend="highs")
        if sol.optimal and (best is None or (sol.value > best if m.sense == "max" else sol.value < best)):
            best = sol.value
    return best


@given(seeds, st.integers(1, 6), st.integers(0, 4))
def test_milp_matches_enumeration(seed, nb, nc):
    m, xs = random_milp(seed, nb, nc)
    want = brute_force(m, xs)
    sol = solve_milp(m)
    if want is None:
        assert sol.status is SolveStatus.INFEASIBLE
    else:
        assert sol.value == pytest.approx(want, abs=1e-6)
        assert all(sol.x[j] in (0.0, 1.0) for j in xs)


@given(seeds, st.integers(1, 6), st.integers(0, 4))
def test_milp_deterministic(seed, nb, nc):
    m, _ = random_milp(seed, nb, nc)
    a, b = solve_milp(m), solve_milp(m)
    assert a.status is b.status and a.nodes == b.nodes
    if a.optimal:
        assert np.array_equal(a.x, b.x)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmco.graphs import Digraph, laplacian
from pmco.optimizer import (
    MAX_REJECTIONS,
    ConfigError,
    InfeasibleOmegaError,
    IterationTrace,
    NumericAbort,
    OmegaSpec,
    RunConfig,
    SwarmState,
    convergence_metrics,
    draw_environment,
    init_swarm,
    run,
    sample_coefficients,
    step_position,
    step_velocity,
    update_global_best,
)
from pmco.optimizer import _iterate
from pmco.objectives import rastrigin, sphere
from pmco.switched import McoCoefficients, SwitchedSystemMatrices, check_theorem_conditions

# H2 needs kappa = 0 and H3-H5 never hold, so H1 is the largest useful set
FEASIBLE = ["h1"]


def config(**kw):
    base = {"mode": "algorithm1", "n": 2, "q": 4, "objective": "sphere", "max_iters": 50, "seed": 1}
    base.update(kw)
    return RunConfig.from_json(base)


def state(x, v, p, objective=sphere):
    x, v, p = (np.array(a, dtype=float) for a in (x, v, p))
    f_x = np.array([objective(r) for r in x])
    return SwarmState(x, v, x.copy(), f_x.copy(), p, objective(p), f_x)


# config


@pytest.mark.parametrize(
    "patch",
    [
        {"mode": "pso"},
        {"q": 1},
        {"objective": "nope"},
        {"bounds": {"lower": [1, 1], "upper": [0, 0]}},
        {"bounds": {"lower": [0, 0, 0]}},
        {"omega": []},
        {"omega": {"ranges": {"mu": [1, 0]}}},
        {"omega": {"ranges": {"mu": [0, 1]}, "sets": {"mu": [0.5]}}},
        {"colour": "red"},
        {"topology": {"all_info": [9]}},
        {"p_matrix": {"spectrum_min": -1.0}},
        {"p_matrix": {"ones": 3}},
        {"seed": -1},
        {"seed": 2**64},
        {"conditions": ["h9"]},
        {"inertia": "half"},
        {"mode": "theorem", "omega": {"ranges": {"h": [0, 1]}}},
    ],
)
def test_config_rejects(patch):
    with pytest.raises(ConfigError):
        config(**patch)


def test_config_round_trip():
    cfg = config(omega={"sets": {"mu": [0.1, 0.2]}, "ranges": {"h": [0.1, 0.5]}}, max_iters=7)
    assert RunConfig.from_json(cfg.to_json()) == cfg
    assert cfg.with_seed(9).seed == 9


def test_default_omega_and_topology():
    cfg = config(q=6)
    assert cfg.omega == OmegaSpec.default()
    assert cfg.topology.all_info_group == (1, 2)
    assert cfg.stop_tol == 1e-10 and cfg.stop_window == 100


def test_omega_finite_list_is_shared():
    spec = OmegaSpec.from_json([0.5])
    rng = np.random.default_rng(0)
    assert {spec.draw(name, rng) for name in ("mu", "eta", "kappa", "h")} == {0.5}


# init


def test_init_degenerate_box():
    cfg = config(bounds={"lower": [2.0, -1.0], "upper": [2.0, -1.0]})
    s = init_swarm(cfg, np.random.default_rng(0))
    np.testing.assert_array_equal(s.x, np.tile([2.0, -1.0], (4, 1)))


def test_init_best_is_minimum_with_low_index_ties():
    cfg = config()
    s = init_swarm(cfg, np.random.default_rng(5))
    assert s.f_p == min(s.f_x)
    np.testing.assert_array_equal(s.p, s.x[int(np.argmin(s.f_x))])
    np.testing.assert_array_equal(s.p_best, s.x)
    assert np.all((s.x >= -5) & (s.x <= 5)) and np.all(np.abs(s.v) <= 1.0)


def test_init_deterministic():
    cfg = config()
    a, b = init_swarm(cfg, np.random.default_rng(3)), init_swarm(cfg, np.random.default_rng(3))
    assert np.array_equal(a.stacked(), b.stacked())


# velocity and position


def _p_matrix():
    return np.array([[0.8, 0.1], [0.1, 0.6]])


@pytest.mark.parametrize("mode", ["algorithm1", "theorem"])
def test_velocity_without_gains_is_projection(mode):
    rng = np.random.default_rng(0)
    s = state(rng.standard_normal((3, 2)), rng.standard_normal((3, 2)), [0.0, 0.0])
    v = step_velocity(s, McoCoefficients(0, 0, 0, 0.5), _p_matrix(), Digraph.complete(3), mode, inertia="projected")
    np.testing.assert_allclose(v, s.v @ _p_matrix().T)


def test_velocity_empty_topology_without_attraction():
    rng = np.random.default_rng(1)
    s = state(rng.standard_normal((3, 2)), rng.standard_normal((3, 2)), [1.0, 1.0])
    v = step_velocity(s, McoCoefficients(0.7, 0.4, 0.0), _p_matrix(), Digraph.empty(3))
    np.testing.assert_allclose(v, s.v @ _p_matrix().T)


@pytest.mark.parametrize("mode", ["algorithm1", "theorem"])
def test_velocity_consensus_fixed_point(mode):
    p = [0.3, -0.2]
    s = state([p] * 3, np.zeros((3, 2)), p)
    v = step_velocity(s, McoCoefficients(0.5, 0.5, 0.5, 0.7), _p_matrix(), Digraph.complete(3), mode)
    assert not np.any(v)


def test_velocity_matches_neighbour_sums():
    # independent form: sums over in-neighbours rather than the Laplacian
    rng = np.random.default_rng(2)
    g = Digraph.from_edges(3, [(1, 2), (2, 3), (3, 1), (1, 3)])
    s = state(rng.standard_normal((3, 2)), rng.standard_normal((3, 2)), rng.standard_normal(2))
    c = McoCoefficients(0.3, 0.2, 0.6)
    pm = _p_matrix()
    adj = g.adjacency
    expected = []
    for k in range(3):
        nb = [j for j in range(3) if adj[k, j]]
        dv = sum((s.v[j] - s.v[k] for j in nb), np.zeros(2))
        dx = sum((s.x[j] - s.x[k] for j in nb), np.zeros(2))
        expected.append(pm @ s.v[k] + c.eta * pm @ dv + c.mu * pm @ dx + c.kappa * pm @ (s.p - s.x[k]))
    np.testing.assert_allclose(step_velocity(s, c, pm, g), expected, atol=1e-14)


def test_velocity_is_order_and_worker_independent():
    from concurrent.futures import ThreadPoolExecutor

    rng = np.random.default_rng(4)
    s = state(rng.standard_normal((6, 3)), rng.standard_normal((6, 3)), rng.standard_normal(3))
    lap = laplacian(Digraph.cycle(6))
    coeffs = [McoCoefficients(*rng.uniform(0, 1, 3)) for _ in range(6)]
    serial = step_velocity(s, coeffs, np.eye(3), lap)
    with ThreadPoolExecutor(4) as ex:
        assert np.array_equal(serial, step_velocity(s, coeffs, np.eye(3), lap, executor=ex))
    perm = rng.permutation(6)
    sp = state(s.x[perm], s.v[perm], s.p)
    lp = lap[np.ix_(perm, perm)]
    permuted = step_velocity(sp, [coeffs[i] for i in perm], np.eye(3), lp)
    np.testing.assert_allclose(permuted, serial[perm], atol=1e-15)


def test_position_updates():
    s = state([[1.0, 2.0]], [[0.5, -0.5]], [0.0, 0.0])
    np.testing.assert_array_equal(step_position(s), [[1.5, 1.5]])
    np.testing.assert_array_equal(step_position(s, "algorithm1"), step_position(s, "theorem", 1.0))
    np.testing.assert_array_equal(step_position(s, "theorem", 0.2), [[1.1, 1.9]])
    s.v[:] = 0
    np.testing.assert_array_equal(step_position(s, "theorem", 0.4), s.x)
    with pytest.raises(ValueError):
        step_position(s, "theorem", 0.0)


# global best


def test_theorem_jump_to_better_agent():
    snap = state([[2.0, 0.0], [0.5, 0.0], [0.5, 0.0]], np.zeros((3, 2)), [1.0, 0.0])
    new = snap.copy()
    info = update_global_best(new, McoCoefficients(0, 0, 0.3, 0.5), "theorem", sphere, snapshot=snap)
    assert info == {"j": 2, "jump": True}
    np.testing.assert_array_equal(new.p, [0.5, 0.0])


def test_theorem_blend_when_no_agent_is_better():
    snap = state([[2.0, 0.0], [3.0, 0.0]], np.zeros((2, 2)), [1.0, 0.0])
    new = snap.copy()
    update_global_best(new, McoCoefficients(0, 0, 0.4, 0.5), "theorem", sphere, snapshot=snap)
    np.testing.assert_allclose(new.p, [1.0 + 0.2 * 1.0, 0.0])
    new = snap.copy()
    update_global_best(new, McoCoefficients(0, 0, 0.0, 0.5), "theorem", sphere, snapshot=snap)
    np.testing.assert_array_equal(new.p, snap.p)


def test_algorithm1_two_agent_trace():
    # hand-stepped pseudocode: agent 1 improves, agent 2 does not
    s = state([[1.0, 0.0], [2.0, 0.0]], np.zeros((2, 2)), [1.0, 0.0])
    s.p_best = np.array([[1.5, 0.0], [0.5, 0.0]])
    s.f_best = np.array([2.25, 0.25])
    s.p, s.f_p = np.array([0.5, 0.0]), 0.25
    before = s.f_p
    update_global_best(s, McoCoefficients(0, 0, 0.5), "algorithm1", sphere)
    np.testing.assert_array_equal(s.p_best, [[1.0, 0.0], [0.5, 0.0]])
    np.testing.assert_allclose(s.p, [0.5, 0.0])
    assert s.f_p <= before


def test_algorithm1_blend_then_replace():
    s = state([[0.1, 0.0], [3.0, 0.0]], np.zeros((2, 2)), [1.0, 0.0])
    s.p_best = np.array([[2.0, 0.0], [3.0, 0.0]])
    s.f_best = np.array([4.0, 9.0])
    s.p, s.f_p = np.array([1.0, 0.0]), 1.0
    update_global_best(s, McoCoefficients(0, 0, 0.5), "algorithm1", sphere)
    # blend gives 0.55 whose value exceeds f(0.1), so p is replaced by the personal best
    np.testing.assert_allclose(s.p, [0.1, 0.0])
    assert s.f_p == pytest.approx(0.01)


def test_nan_objective_aborts():
    def bad(x):
        return float("nan") if x[0] > 0.7 else float(x @ x)

    snap = state([[2.0, 0.0], [3.0, 0.0]], np.zeros((2, 2)), [0.5, 0.0], objective=sphere)
    new = snap.copy()
    with pytest.raises(NumericAbort):
        update_global_best(new, McoCoefficients(0, 0, 0.4, 1.0), "theorem", bad, snapshot=snap)


# coefficients


def test_singleton_omega():
    cfg = config(mode="theorem", omega=[0.5], conditions=[])
    for seed in range(5):
        assert sample_coefficients(cfg, np.random.default_rng(seed)).as_dict() == {
            "mu": 0.5, "eta": 0.5, "kappa": 0.5, "h": 0.5}


def test_algorithm1_draws_use_unit_step():
    c = sample_coefficients(config(), np.random.default_rng(0))
    assert c.h == 1.0 and 0 <= c.mu <= 0.2 and 0 <= c.kappa <= 1


def test_draws_are_reproducible():
    cfg = config()
    a = [sample_coefficients(cfg, np.random.default_rng([4, t])) for t in range(5)]
    b = [sample_coefficients(cfg, np.random.default_rng([4, t])) for t in range(5)]
    assert a == b


def test_inflated_P_is_infeasible_for_H4():
    cfg = config(mode="theorem", omega=[0.5], conditions=["h4"])
    with pytest.raises(InfeasibleOmegaError) as err:
        sample_coefficients(cfg, np.random.default_rng(0), context=(laplacian(Digraph.complete(4)), 3 * np.eye(2)))
    diag = err.value.diagnostic
    assert diag["rejections"] == MAX_REJECTIONS
    assert diag["failures_by_condition"]["h4"] == MAX_REJECTIONS


def test_default_theorem_conditions_are_infeasible():
    cfg = config(mode="theorem", max_iters=5)
    with pytest.raises(InfeasibleOmegaError) as err:
        run(cfg)
    assert err.value.diagnostic["failures_by_condition"]["h3"] == MAX_REJECTIONS


def test_validated_draws_satisfy_conditions():
    cfg = config(mode="theorem", conditions=["h1", "h2"], omega={"sets": {"kappa": [0.0]}})
    _, graph, pm = draw_environment(cfg, 0)
    lap = laplacian(graph).astype(float)
    c = sample_coefficients(cfg, np.random.default_rng(2), context=(lap, pm))
    for j in range(1, cfg.q + 1):
        rep = check_theorem_conditions(SwitchedSystemMatrices.build(j, c, lap, pm))
        assert rep.h1 and rep.h2


def test_h2_with_positive_kappa_is_infeasible():
    cfg = config(mode="theorem", conditions=["h2"], omega={"ranges": {"kappa": [0.01, 1.0]}})
    _, graph, pm = draw_environment(cfg, 0)
    with pytest.raises(InfeasibleOmegaError):
        sample_coefficients(cfg, np.random.default_rng(0), context=(laplacian(graph).astype(float), pm))


# run


def test_max_iters_zero_returns_init_best():
    cfg = config(max_iters=0)
    res = run(cfg)
    init = init_swarm(cfg, np.random.default_rng([cfg.seed, 0]))
    assert res.iterations == 0 and len(res.trace) == 0
    assert res.best_f == init.f_p


def test_theorem_sphere_reaches_tolerance():
    res = run(config(mode="theorem", q=8, max_iters=2000, conditions=FEASIBLE, seed=3))
    assert res.best_f < 1e-4


def test_constant_objective_keeps_p_in_algorithm1_mode():
    cfg = config(objective="constant", max_iters=200, stop_window=10**6)
    res = run(cfg)
    init = init_swarm(cfg, np.random.default_rng([cfg.seed, 0]))
    np.testing.assert_array_equal(res.best_x, init.p)


def test_constant_objective_damps_velocity_in_theorem_mode():
    # without a strict improvement the blend branch still moves p towards x_min
    cfg = config(mode="theorem", objective="constant", q=4, max_iters=1500, stop_window=10**6, conditions=[])
    res = run(cfg)
    assert not any(r["jump"] for r in res.trace)
    assert res.best_f == 0.0
    m = convergence_metrics(res.trace)
    assert m["velocity_sup_trend"]["final"] < 1e-6
    assert m["spread_trend"]["decreasing"]


def test_run_is_worker_independent():
    cfg = config(mode="algorithm1", q=6, max_iters=40)
    a, b = run(cfg, workers=1), run(cfg, workers=4)
    assert a.trace.to_jsonl() == b.trace.to_jsonl()
    assert np.array_equal(a.state.stacked(), b.state.stacked())


def test_nan_objective_aborts_run():
    with pytest.raises(NumericAbort):
        run(config(), objective=lambda x: float("nan"))


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_algorithm1_personal_bests_never_worsen(seed):
    cfg = config(seed=seed, max_iters=30, objective="rastrigin")
    state = init_swarm(cfg, np.random.default_rng([seed, 0]))
    for t in range(cfg.max_iters):
        new, _ = _iterate(cfg, state, rastrigin, None, t)
        assert np.all(new.f_best <= state.f_best)
        assert new.f_p <= np.min(new.f_best)
        state = new


def test_theorem_iteration_equals_matrix_form():
    cfg = config(mode="theorem", q=3, conditions=[], max_iters=1, objective="constant")
    state = init_swarm(cfg, np.random.default_rng([cfg.seed, 0]))
    new, rec = _iterate(cfg, state, lambda x: 0.0, None, 0)
    _, graph, pm = draw_environment(cfg, 0)
    c = McoCoefficients(**rec["coeffs"])
    inst = SwitchedSystemMatrices.build(rec["j"], c, laplacian(graph).astype(float), pm)
    assert not rec["jump"]
    np.testing.assert_allclose(new.stacked(), inst.keep_step @ state.stacked(), atol=1e-12)


# metrics


def test_metrics_single_record():
    tr = IterationTrace()
    tr.append({"t": 1, "max_speed": 1.0, "spread": 1.0, "dp": 0.0})
    m = convergence_metrics(tr)
    assert m["velocity_sup_trend"] == {"status": "insufficient-data"}
    assert m["spread_trend"] == {"status": "insufficient-data"}


def test_metrics_on_converged_run():
    res = run(config(q=6, max_iters=3000, stop_window=200))
    m = convergence_metrics(res.trace, stop_tol=1e-8)
    assert res.converged
    assert m["velocity_sup_trend"]["final"] < 1e-6
    assert m["p_settled"]


def test_trace_monotone_and_csv():
    tr = IterationTrace()
    tr.append({"t": 1, "f_best": 1.0, "max_speed": 0.5, "spread": 0.25})
    with pytest.raises(ValueError):
        tr.append({"t": 1, "f_best": 1.0, "max_speed": 0.5, "spread": 0.25})
    assert tr.to_csv().splitlines() == ["t,f_best,max_speed,spread", "1,1.0,0.5,0.25"]


def test_empty_trace_metrics_rejected():
    with pytest.raises(ValueError):
        convergence_metrics(IterationTrace())

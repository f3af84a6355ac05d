import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfcopt.model import Bounds
from lfcopt.optimizers import (
    BfoParams,
    GdParams,
    OptResult,
    PsoParams,
    bfo_minimize,
    chemotaxis_sweep,
    eliminate_disperse,
    fd_gradient,
    gd_minimize,
    minimize,
    pso_minimize,
    reproduce,
    sphere,
    survivor_order,
    swarming_cost,
    tumble_direction,
)

BOX = Bounds.uniform(12, -5.0, 5.0)
CANONICAL = BfoParams(d_attract=0.1, w_attract=0.2, h_repellent=0.1, w_repellent=10.0)


class Recorder:
    def __init__(self, f, bounds):
        self.f, self.bounds, self.calls = f, bounds, 0

    def __call__(self, x):
        assert self.bounds.contains(x), x
        self.calls += 1
        return self.f(x)


def non_increasing(seq):
    return all(b <= a for a, b in zip(seq, seq[1:]))


# tumble direction

def test_tumble_direction_is_unit():
    rng = np.random.default_rng(3)
    for _ in range(50):
        assert np.linalg.norm(tumble_direction(rng, 12)) == pytest.approx(1.0, abs=1e-12)


def test_tumble_direction_one_dimensional():
    rng = np.random.default_rng(0)
    assert {float(tumble_direction(rng, 1)[0]) for _ in range(20)} <= {-1.0, 1.0}


def test_tumble_direction_repeatable():
    a = tumble_direction(np.random.default_rng(42), 3)
    b = tumble_direction(np.random.default_rng(42), 3)
    np.testing.assert_array_equal(a, b)


# swarming term

def test_swarming_coincident_single_member_cancels():
    theta = np.array([0.3, -1.2])
    assert swarming_cost(theta, theta[None, :], CANONICAL) == pytest.approx(0.0, abs=1e-15)


def test_swarming_two_members_closed_form():
    theta = np.zeros(2)
    population = np.array([[1.0, 0.0], [0.0, -1.0]])
    value = swarming_cost(theta, population, CANONICAL)
    assert value == pytest.approx(2 * (-0.1 * math.exp(-0.2) + 0.1 * math.exp(-10)), abs=1e-12)
    assert value == pytest.approx(-0.163737, abs=1e-6)


def test_swarming_vanishes_far_away():
    assert swarming_cost(np.zeros(3), np.full((4, 3), 1e3), CANONICAL) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.floats(0, 1), st.floats(0, 1))
def test_swarming_self_term_is_h_minus_d(theta, d, h):
    params = BfoParams(d_attract=d, h_repellent=h)
    theta = np.array(theta)
    assert swarming_cost(theta, theta[None, :], params) == h - d


# chemotaxis

def test_chemotaxis_at_optimum_stays_near_origin():
    bounds = Bounds.uniform(4, -1.0, 1.0)
    params = BfoParams(S=4)
    pop = np.zeros((4, 4))
    rng = np.random.default_rng(1)
    new, costs, health = chemotaxis_sweep(pop, np.full(4, np.nan), sphere, params, rng, bounds)
    step = params.step_scale * bounds.span
    assert new.shape == pop.shape
    assert np.all(np.abs(new) <= step + 1e-12)
    assert np.all(np.isfinite(health))


@pytest.mark.parametrize("swims,expected", [(4, 0.5), (10, 0.0)])
def test_forced_swim_in_one_dimension(swims, expected):
    bounds = Bounds.uniform(1, -2.0, 2.0)
    params = BfoParams(S=2, Ns=swims, d_attract=0, h_repellent=0)
    f = lambda x: float(x[0] ** 2)
    pop = np.array([[1.0], [1.0]])
    new, costs, _ = chemotaxis_sweep(pop, np.full(2, np.nan), f, params, np.random.default_rng(0), bounds,
                                     step=np.array([0.1]), directions=np.array([[-1.0], [-1.0]]))
    # tumble to 0.9, then 0.1 per swim while x^2 keeps dropping; the swim past 0 is refused
    assert new[0, 0] == pytest.approx(expected, abs=1e-12)
    assert costs[0] == pytest.approx(expected ** 2, abs=1e-12)
    if swims >= 9:
        assert 0.0 <= abs(new[0, 0]) <= 0.1


def test_failed_swim_is_not_taken():
    bounds = Bounds.uniform(1, -2.0, 2.0)
    params = BfoParams(S=2, Ns=10, d_attract=0, h_repellent=0)
    f = lambda x: float(x[0] ** 2)
    pop = np.array([[0.15], [0.15]])
    new, _, _ = chemotaxis_sweep(pop, np.full(2, np.nan), f, params, np.random.default_rng(0), bounds,
                                 step=np.array([0.1]), directions=np.array([[-1.0], [-1.0]]))
    assert new[0, 0] == pytest.approx(0.05)


# reproduction and dispersal

def test_reproduce_keeps_healthiest_half():
    pop = np.array([[1.0], [2.0], [3.0], [4.0]])
    out = reproduce(pop, [1, 2, 3, 4])
    assert sorted(out[:, 0].tolist()) == [1.0, 1.0, 2.0, 2.0]


def test_reproduce_ties_broken_by_index():
    assert survivor_order([5, 5, 5, 5]).tolist() == [0, 1, 0, 1]


def test_reproduce_idempotent_on_identical_points():
    pop = np.ones((6, 3))
    np.testing.assert_array_equal(reproduce(pop, np.arange(6)), pop)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**31))
def test_reproduce_preserves_size(half, seed):
    rng = np.random.default_rng(seed)
    pop = rng.normal(size=(2 * half, 3))
    assert reproduce(pop, rng.normal(size=2 * half)).shape == pop.shape


def test_disperse_extremes():
    rng = np.random.default_rng(0)
    pop = np.zeros((10, 12))
    same, moved = eliminate_disperse(pop, BfoParams(Ped=0.0), BOX, rng)
    np.testing.assert_array_equal(same, pop)
    assert not moved.any()
    fresh, moved = eliminate_disperse(pop, BfoParams(Ped=1.0), BOX, rng)
    assert moved.all()
    assert all(BOX.contains(x) for x in fresh)


def test_disperse_count_pinned_for_seed():
    pop = np.zeros((120, 12))
    _, moved = eliminate_disperse(pop, BfoParams(S=120, Ped=0.25), BOX, np.random.default_rng(0))
    assert 10 <= moved.sum() <= 50
    assert moved.sum() == 28


# full runs

def test_bfo_sphere_desk():
    f = Recorder(sphere, BOX)
    res = bfo_minimize(f, BOX, BfoParams(), seed=0)
    assert res.best_cost < 1e-2
    assert non_increasing(res.history)
    assert res.best_cost == res.history[-1]
    assert 0 < res.evaluations == f.calls <= BfoParams().max_budget()


def test_bfo_budget_cap():
    res = bfo_minimize(sphere, BOX, BfoParams(max_evaluations=500), seed=0)
    assert res.evaluations == 500


def test_pso_sphere():
    f = Recorder(sphere, BOX)
    res = pso_minimize(f, BOX, PsoParams(swarm_size=30, iterations=100), seed=0)
    assert res.best_cost < 1e-2
    assert non_increasing(res.history)
    assert BOX.contains(res.best)


def test_gd_quadratic_one_dimensional():
    bounds = Bounds.uniform(1, 0.0, 5.0)
    res = gd_minimize(lambda x: float((x[0] - 2.0) ** 2), bounds, GdParams(learning_rate=0.1), start=np.zeros(1))
    assert abs(res.best[0] - 2.0) < 1e-3
    assert non_increasing(res.history)


def test_fd_gradient_matches_analytic():
    x = np.ones(12)
    g = fd_gradient(sphere, x, BOX, 1e-3)
    np.testing.assert_allclose(g, 2 * x, rtol=1e-4)


def test_fd_gradient_stays_inside_at_faces():
    f = Recorder(sphere, BOX)
    g = fd_gradient(f, BOX.lower.copy(), BOX, 1e-3)
    assert np.all(np.isfinite(g))


def test_gd_from_corner():
    f = Recorder(sphere, BOX)
    res = gd_minimize(f, BOX, GdParams(), start=BOX.lower.copy())
    assert res.best_cost < 1e-2


@pytest.mark.parametrize("method", ["bfo", "pso", "gd"])
def test_identical_seed_gives_identical_result(method):
    params = {"bfo": BfoParams(max_evaluations=800), "pso": PsoParams(iterations=10),
              "gd": GdParams(iterations=20)}[method]
    start = BOX.lower.copy() if method == "gd" else None
    a = minimize(method, sphere, BOX, params, seed=7, start=start)
    b = minimize(method, sphere, BOX, params, seed=7, start=start)
    assert a.to_json() == b.to_json()


def test_result_json_round_trip():
    res = pso_minimize(sphere, BOX, PsoParams(iterations=5), seed=0)
    back = OptResult.from_dict(res.to_dict())
    assert back.to_json() == res.to_json()


def test_unknown_method():
    with pytest.raises(ValueError):
        minimize("sa", sphere, BOX)


def test_param_validation():
    with pytest.raises(ValueError):
        BfoParams(S=5)
    with pytest.raises(ValueError):
        PsoParams(swarm_size=1)
    with pytest.raises(ValueError):
        GdParams(backtrack=1.5)


def test_metaheuristics_beat_gd_from_corner_at_matched_budget():
    """BFO and PSO medians should each be below GD's on the sphere with a shared budget."""
    budget = BfoParams().max_evaluations or 12_000
    bfo, pso, gd = [], [], []
    for seed in range(5):
        bfo.append(bfo_minimize(sphere, BOX, BfoParams(max_evaluations=budget), seed).best_cost)
        pso.append(pso_minimize(sphere, BOX, PsoParams(iterations=budget // 30, max_evaluations=budget), seed).best_cost)
        gd.append(gd_minimize(sphere, BOX, GdParams(iterations=budget, max_evaluations=budget),
                              start=BOX.lower.copy()).best_cost)
    print(f"median best cost  bfo={np.median(bfo):.3g}  pso={np.median(pso):.3g}  gd={np.median(gd):.3g}")
    assert np.median(bfo) < np.median(gd)
    assert np.median(pso) < np.median(gd)

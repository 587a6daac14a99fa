import itertools
import math
import random

import pytest
from scipy.stats import wasserstein_distance

from construal_sim.errors import NonFiniteScore, TooManyObjects
from construal_sim.physics import TABLE_NOISE, EngineConfig, NoiseParams, run_rollout
from construal_sim.planner import PlannerParams, bfs_distance
from construal_sim.rng import stream
from construal_sim.vgc import (
    ConstrualScore, VgcParams, _grid_sample, enumerate_construals, grid_construal_value, luce_marginals,
    luce_probabilities, physics_construal_utility_tv, physics_construal_utility_w1, vgc_grid, vgc_physics,
)
from construal_sim.worldgen import gen_gridworld
from construal_sim.worlds import GridWorld, Obstacle, validate_grid

from conftest import plinko, rect, wall_grid

ASTAR = PlannerParams(alpha_d=60.0, alpha_h=60.0)
CFG = EngineConfig()


def test_enumeration_sizes():
    assert list(enumerate_construals([])) == [frozenset()]
    subsets = list(enumerate_construals(["c", "a", "b"]))
    assert len(subsets) == 8 == len(set(subsets))
    assert subsets[1] == {"a"} and subsets[-1] == {"a", "b", "c"}
    with pytest.raises(TooManyObjects):
        list(enumerate_construals([f"o{i}" for i in range(21)]))


def test_full_construal_value_is_shortest_path():
    for seed in range(5):
        w = gen_gridworld(seed)
        v = grid_construal_value(w, w.object_ids, ASTAR, 5, -1000.0, random.Random(seed))
        assert v == -bfs_distance(w, w.object_ids, w.start, w.goal)


def test_missing_wall_gets_stuck():
    w = wall_grid()
    assert grid_construal_value(w, (), ASTAR, 3, -250.0, random.Random(0)) == -250.0
    assert grid_construal_value(w, ("wall",), ASTAR, 3, -250.0, random.Random(0)) == -8.0


def test_empty_world_values_identical():
    w = validate_grid(GridWorld(6, 6, (0, 0), (5, 5), ()))
    vals = {grid_construal_value(w, (), PlannerParams(), 10, -360.0, random.Random(3))}
    assert vals == {-10.0}


def test_failure_value_default():
    assert VgcParams().failure_for(wall_grid()) == -250.0
    assert VgcParams(failure_value=-7.0).failure_for(wall_grid()) == -7.0


def brute_luce(vors, alpha):
    w = [math.exp(v / alpha) for v in vors]
    z = sum(w)
    return [x / z for x in w]


def test_luce_three_objects_brute_force():
    rng = random.Random(5)
    subsets = list(enumerate_construals(["a", "b", "c"]))
    utils = [rng.uniform(-3, 0) for _ in subsets]
    scores = [ConstrualScore(c, u) for c, u in zip(subsets, utils)]
    p = brute_luce([u - len(c) for c, u in zip(subsets, utils)], 0.7)
    marg = luce_marginals(scores, 0.7)
    for o in "abc":
        assert marg[o] == pytest.approx(sum(pi for pi, c in zip(p, subsets) if o in c), abs=1e-12)


def test_luce_equal_and_uniform_limits():
    two = [ConstrualScore(frozenset({"a"}), 1.0), ConstrualScore(frozenset({"b"}), 1.0)]
    assert luce_probabilities(two, 0.1) == [0.5, 0.5]
    subsets = list(enumerate_construals(["a", "b", "c", "d"]))
    flat = [ConstrualScore(c, -2.0) for c in subsets]
    hot = [ConstrualScore(c, random.Random(i).uniform(-5, 0)) for i, c in enumerate(subsets)]
    assert all(v == pytest.approx(0.5, abs=1e-12) for v in luce_marginals(hot, 1e12).values())
    # equal utilities alone do not give 0.5 because cost differs; offsetting cost does
    even = [ConstrualScore(c, float(len(c))) for c in subsets]
    assert all(v == pytest.approx(0.5, abs=1e-12) for v in luce_marginals(even, 0.3).values())
    assert luce_marginals(flat, 0.3)["a"] < 0.5


def test_luce_shift_invariance():
    rng = random.Random(9)
    subsets = list(enumerate_construals(["a", "b", "c", "d"]))
    base = [ConstrualScore(c, rng.uniform(-4, 0)) for c in subsets]
    shifted = [ConstrualScore(s.construal, s.utility + 123.25) for s in base]
    a, b = luce_marginals(base, 0.5), luce_marginals(shifted, 0.5)
    assert all(abs(a[o] - b[o]) < 1e-12 for o in a)


def test_luce_rejects_non_finite():
    with pytest.raises(NonFiniteScore):
        luce_probabilities([ConstrualScore(frozenset(), -math.inf)], 1.0)
    with pytest.raises(ValueError):
        VgcParams(luce_alpha=0.0)


def test_cost_is_cardinality():
    s = ConstrualScore(frozenset({"a", "b"}), -3.0)
    bigger = ConstrualScore(frozenset({"a", "b", "c"}), -3.0)
    assert s.cost == 2 and bigger.cost - s.cost == 1 and s.vor == -5.0


def test_grid_cache_matches_uncached_recomputation():
    w = gen_gridworld(7)
    params = VgcParams(luce_alpha=0.1, value_rollouts=6)
    res = vgc_grid(w, PlannerParams(0.0, 1.0), params, seed=3)
    fail = params.failure_for(w)
    for score in res.scores:
        vals = [
            _grid_sample(w, score.construal, PlannerParams(0.0, 1.0), stream(3, "vgc-grid", k), None, fail,
                         4 * w.n_cells)[0]
            for k in range(6)
        ]
        assert score.utility == math.fsum(vals) / 6
    assert sum(res.probabilities) == pytest.approx(1.0)
    assert res.expected_size() == pytest.approx(sum(res.marginals.values()))


def landings(world, active, n, seed):
    out = []
    for k in range(n):
        t = run_rollout(world, TABLE_NOISE, CFG, stream(seed, "rollout", k, "physics"), active=active)
        if t.landed:
            out.append(t.landing_x)
    return out


def deflector():
    return plinko([
        Obstacle("ramp", ((200, 250), (400, 150), (400, 250))),
        # above the drop height: with restitution <= 1 the ball never gets there
        Obstacle("aside", rect(500, 10, 540, 40)),
    ], ball=(300.0, 60.0))


def test_w1_utility_matches_sorted_oracle():
    w = deflector()
    n = 80
    full = landings(w, None, n, 4)
    empty = landings(w, set(), n, 4)
    # a few drops creep along the ramp past the time limit and are excluded
    assert len(empty) == n and len(full) > 0.9 * n
    u = physics_construal_utility_w1(w, (), TABLE_NOISE, CFG, n, 4)
    assert u == pytest.approx(-wasserstein_distance(empty, full), abs=1e-9)
    assert u < -50
    assert physics_construal_utility_w1(w, ("ramp", "aside"), TABLE_NOISE, CFG, n, 4) == 0.0


def test_far_object_barely_matters():
    w = deflector()
    with_ramp = physics_construal_utility_w1(w, ("ramp",), TABLE_NOISE, CFG, 80, 4)
    assert abs(with_ramp - 0.0) < 2.0


def test_tv_utility():
    w = deflector()
    assert physics_construal_utility_tv(w, ("ramp", "aside"), TABLE_NOISE, CFG, 60, 1, scale=3.0) == 0.0
    u = physics_construal_utility_tv(w, (), NoiseParams(), CFG, 5, 1, scale=3.0)
    assert u == -3.0  # ramp moves every zero-noise drop out of the middle bucket


def test_physics_full_construal_vor_and_cache():
    w = deflector()
    res = vgc_physics(w, TABLE_NOISE, CFG, VgcParams(luce_alpha=20.0, value_rollouts=40), seed=2)
    full = next(s for s in res.scores if s.construal == {"ramp", "aside"})
    assert full.vor == -2.0
    for s in res.scores:
        assert s.utility == physics_construal_utility_w1(w, s.construal, TABLE_NOISE, CFG, 40, 2)
    assert res.marginals["ramp"] > res.marginals["aside"]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_marginals_sum_over_subsets(n):
    ids = [f"o{i}" for i in range(n)]
    scores = [ConstrualScore(c, -0.5 * len(c) ** 2) for c in enumerate_construals(ids)]
    p = luce_probabilities(scores, 0.4)
    marg = luce_marginals(scores, 0.4)
    for o in ids:
        assert marg[o] == pytest.approx(math.fsum(pi for pi, s in zip(p, scores) if o in s.construal), abs=1e-12)
    assert sorted(itertools.chain.from_iterable(s.construal for s in scores)).count("o0") == 2 ** (n - 1)

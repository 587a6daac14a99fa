import math
import random

import pytest
from scipy.stats import multivariate_normal

from construal_sim.baselines import (
    ProbePair, load_probes, maximal_planner, random_construal_planner, recall_link, reconstructive_response,
    signal_detection_response,
)
from construal_sim.errors import DataFileError
from construal_sim.physics import TABLE_NOISE, EngineConfig, NoiseParams
from construal_sim.planner import PlannerParams, bfs_distance
from construal_sim.worldgen import gen_gridworld
from construal_sim.worlds import GridObject, GridWorld, Obstacle, validate_grid

from conftest import plinko, rect

ASTAR = PlannerParams(alpha_d=60.0, alpha_h=60.0)
CFG = EngineConfig()


def probe(dx=30.0, dy=0.0):
    return ProbePair("w", "o", dx, dy)


def test_probe_shift_bounds():
    assert probe(6.0, 8.0).shift == 10.0
    with pytest.raises(ValueError):
        probe(5.0, 0.0)
    with pytest.raises(ValueError):
        probe(40.0, 40.0)
    rng = random.Random(0)
    for _ in range(200):
        assert 10.0 <= ProbePair.random("w", "o", rng).shift <= 50.0


def test_load_probes(tmp_path):
    good = tmp_path / "p.csv"
    good.write_text("world_id,object_id,lure_dx,lure_dy\nw1,b2,12,-5\n")
    assert load_probes(good) == [ProbePair("w1", "b2", 12.0, -5.0)]
    bad = tmp_path / "bad.csv"
    bad.write_text("world_id,object_id,lure_dx,lure_dy\nw1,b2,12,-5\nw1,b3,x,1\n")
    with pytest.raises(DataFileError, match="row 3"):
        load_probes(bad)
    with pytest.raises(DataFileError):
        (tmp_path / "h.csv").write_text("a,b\n1,2\n")
        load_probes(tmp_path / "h.csv")
    with pytest.raises(OSError):
        load_probes(tmp_path / "missing.csv")


def test_maximal_planner_is_optimal():
    for seed in range(10):
        w = gen_gridworld(seed)
        plan, expansions, construal = maximal_planner(w, ASTAR, random.Random(seed))
        assert plan.steps == bfs_distance(w, w.object_ids, w.start, w.goal)
        assert construal == set(w.object_ids) and expansions > 0
        blocked = {c for o in w.objects for c in o.cells}
        assert not blocked & set(plan.states)


def test_random_planner_limits():
    w = gen_gridworld(3)
    best = bfs_distance(w, w.object_ids, w.start, w.goal)
    steps, _, construal = random_construal_planner(w, ASTAR, 1.0, random.Random(1))
    assert steps == best and construal == set(w.object_ids)
    corridor = validate_grid(GridWorld(6, 3, (0, 1), (5, 1), (GridObject("a", ((2, 0), (3, 0))),)))
    steps, _, construal = random_construal_planner(corridor, ASTAR, 0.0, random.Random(2))
    assert steps == 5 and construal == frozenset()


def test_random_planner_size_is_binomial():
    w = gen_gridworld(4)
    n_obj = len(w.objects)
    rng = random.Random(3)
    n = 10_000
    sizes = [len(random_construal_planner(w, PlannerParams(0.0, 1.0), 0.3, rng)[2]) for _ in range(n)]
    mean = sum(sizes) / n
    sd = math.sqrt(n_obj * 0.3 * 0.7 / n)
    assert abs(mean - 0.3 * n_obj) < 3 * sd


def test_random_planner_rejects_bad_p():
    with pytest.raises(ValueError):
        random_construal_planner(gen_gridworld(0), ASTAR, 1.5, random.Random(0))


def gaussian_choice(n, pr, kappa, alpha):
    cov = kappa ** 2 / n
    rv = multivariate_normal([0.0, 0.0], [[cov, 0.0], [0.0, cov]])
    d = rv.logpdf([0.0, 0.0]) - rv.logpdf([pr.lure_dx, pr.lure_dy])
    return 1.0 / (1.0 + math.exp(-alpha * d))


def test_signal_detection_matches_density_oracle():
    for n in (1, 2, 4, 9):
        for pr in (probe(30.0), probe(-6.0, 8.0), probe(20.0, -35.0)):
            got = signal_detection_response(n, pr, 20.0, 0.7)
            assert got == pytest.approx(gaussian_choice(n, pr, 20.0, 0.7), abs=1e-12)


def test_signal_detection_examples():
    assert signal_detection_response(0, probe(), 20.0, 1.0) == 0.5
    assert signal_detection_response(4, probe(), 20.0, 1.0) > signal_detection_response(1, probe(), 20.0, 1.0)
    assert 0.0 < signal_detection_response(500, probe(50.0), 1.0, 100.0) < 1.0


def test_signal_detection_monotone_lattice():
    for kappa in (5.0, 20.0, 60.0):
        for alpha in (0.1, 1.0):
            grid = [[signal_detection_response(n, probe(s), kappa, alpha) for s in (10.0, 20.0, 35.0, 50.0)]
                    for n in range(0, 6)]
            for row in grid:
                assert row == sorted(row)
            for col in zip(*grid):
                assert list(col) == sorted(col)


def wedge_world():
    # the apex sits right of the drop, so the ball runs off the left slope
    return plinko([
        Obstacle("wedge", ((310, 200), (360, 250), (260, 250))),
        Obstacle("high", rect(500, 10, 540, 40)),
    ])


def test_reconstruction_prefers_true_placement():
    w = wedge_world()
    pr = ProbePair("w", "wedge", -20.0, 0.0)
    p = reconstructive_response(w, pr, TABLE_NOISE, CFG, 60, 0.5, seed=1)
    assert p > 0.5


def test_reconstruction_indifferent_to_unreachable_object():
    w = wedge_world()
    pr = ProbePair("w", "high", 0.0, 15.0)
    assert reconstructive_response(w, pr, TABLE_NOISE, CFG, 40, 0.5, seed=1) == 0.5


def test_reconstruction_temperature_limit():
    w = wedge_world()
    pr = ProbePair("w", "wedge", -20.0, 0.0)
    p = reconstructive_response(w, pr, NoiseParams(), CFG, 5, 1e12, seed=1)
    assert p == pytest.approx(0.5, abs=1e-9)


def test_recall_link():
    assert recall_link(0.0) == 0.5 and recall_link(1.0) == 1.0
    assert recall_link(0.4) == pytest.approx(0.7)
    xs = [i / 10 for i in range(11)]
    ys = [recall_link(x) for x in xs]
    assert ys == sorted(ys)
    with pytest.raises(ValueError):
        recall_link(1.2)

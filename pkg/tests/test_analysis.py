import math

import pytest

from construal_sim.analysis import (
    HumanRow, ModelRunner, SweepSettings, EfficiencyRecord, algorithmic_utility, collision_probabilities,
    efficiency_records, grid_search_fit, load_human_data, regime_sweep, write_human_data,
)
from construal_sim.errors import DataFileError, DegenerateInput, NoOverlap
from construal_sim.jit import JitParams
from construal_sim.physics import TABLE_NOISE, EngineConfig
from construal_sim.vgc import VgcParams
from construal_sim.worldgen import gen_gridworld, gen_plinko

from conftest import chute_world

FAST = SweepSettings(vgc=VgcParams(luce_alpha=0.1, value_rollouts=4), rollouts=4)


def rec(model="jit", u=-10.0, c=30.0, r=2.0):
    return EfficiencyRecord(model, "w", u, c, r)


def test_algorithmic_utility():
    r = rec()
    assert algorithmic_utility(r, 0.0, 0.0) == -10.0
    assert algorithmic_utility(r, 0.1, 0.5) == pytest.approx(-10.0 - 3.0 - 1.0)
    assert algorithmic_utility(r, 0.0, 2.0) - algorithmic_utility(r, 0.0, 1.0) == -2.0
    with pytest.raises(ValueError):
        algorithmic_utility(r, -1.0, 0.0)


def test_record_costs_nonnegative():
    with pytest.raises(ValueError):
        rec(c=-1.0)


def test_efficiency_record_shapes():
    w = gen_gridworld(2)
    recs = {r.model: r for r in efficiency_records(w, "g2", 0, settings=FAST)}
    assert set(recs) == {"maximal", "vgc", "jit", "random"}
    assert recs["maximal"].representation_cost == len(w.objects)
    for r in recs.values():
        assert 0 <= r.representation_cost <= len(w.objects)
        assert r.compute_cost >= 0
    # VGC pays for every construal it scores
    assert recs["vgc"].compute_cost >= 2 ** len(w.objects)


@pytest.fixture(scope="module")
def small_sweep():
    worlds = [(f"g{s}", gen_gridworld(s)) for s in range(3)]
    return regime_sweep(worlds, alphas=(0.0, 1.0), betas=(0.0, 1000.0), seeds=(0,), settings=FAST)


def test_sweep_no_cost_cell(small_sweep):
    assert small_sweep.winner(0.0, 0.0) in ("maximal", "vgc")


def test_sweep_huge_beta_picks_smallest_construal(small_sweep):
    sizes = {m: small_sweep.mean_cost(m, "representation_cost") for m in small_sweep.models}
    assert small_sweep.winner(0.0, 1000.0) == min(sizes, key=sizes.get)


def test_sweep_rows_and_reproducible(small_sweep):
    rows = list(small_sweep.rows())
    assert len(rows) == 2 * 2 * 4
    assert sum(r["winner"] for r in rows) == 4
    worlds = [(f"g{s}", gen_gridworld(s)) for s in range(3)]
    again = regime_sweep(worlds, alphas=(0.0, 1.0), betas=(0.0, 1000.0), seeds=(0,), settings=FAST)
    assert list(again.rows()) == rows


def test_sweep_tie_goes_to_model_order():
    worlds = [("g0", gen_gridworld(0))]
    res = regime_sweep(worlds, models=("jit", "maximal"), alphas=(0.0,), betas=(0.0,),
                       settings=SweepSettings(rollouts=2))
    cell = res.cells[0]
    if cell.mean_v["jit"] == cell.mean_v["maximal"]:
        assert cell.winner == "maximal"
    assert res.models == ("maximal", "jit")


def test_sweep_needs_worlds():
    with pytest.raises(ValueError):
        regime_sweep([])


def table_runner(table):
    return lambda params: table[params["x"]]


def rows(values, measure="recall"):
    return [HumanRow("w", f"o{i}", "p1", measure, v) for i, v in enumerate(values)]


def test_fit_single_point_and_objectives():
    data = rows([0.1, 0.5, 0.9])
    table = {
        0: {("w", "o0"): 0.9, ("w", "o1"): 0.5, ("w", "o2"): 0.1},
        1: {("w", "o0"): 0.2, ("w", "o1"): 0.5, ("w", "o2"): 0.8},
        2: {("w", "o0"): 0.1, ("w", "o1"): 0.6, ("w", "o2"): 0.9},
    }
    one = grid_search_fit(table_runner(table), data, {"x": [1]})
    assert one.best_params == {"x": 1} and len(one.grid) == 1
    best = grid_search_fit(table_runner(table), data, {"x": [0, 1, 2]}, "pearson")
    assert best.best_params == {"x": 1} and best.objective_value == pytest.approx(1.0)
    assert grid_search_fit(table_runner(table), data, {"x": [0, 1, 2]}, "rmse").best_params == {"x": 2}
    ll = grid_search_fit(table_runner(table), data, {"x": [0, 1, 2]}, "loglik")
    assert ll.best_params == {"x": 2}
    # outcomes threshold at 0.5: (0, 1, 1)
    assert ll.objective_value == pytest.approx(math.log(0.9) + math.log(0.6) + math.log(0.9))


def test_fit_tie_goes_to_smallest_tuple():
    data = rows([0.1, 0.5, 0.9])
    same = {("w", "o0"): 0.0, ("w", "o1"): 1.0, ("w", "o2"): 2.0}
    res = grid_search_fit(lambda p: same, data, {"b": [2, 1], "a": [5, 3]})
    assert res.best_params == {"a": 3, "b": 1}


def test_fit_errors():
    data = rows([0.1, 0.5, 0.9])
    with pytest.raises(NoOverlap):
        grid_search_fit(lambda p: {("x", "y"): 1.0}, data, {"x": [0]})
    with pytest.raises(DegenerateInput):
        grid_search_fit(lambda p: {("w", f"o{i}"): 0.3 for i in range(3)}, data, {"x": [0, 1]})
    with pytest.raises(ValueError):
        grid_search_fit(lambda p: {}, data, {"x": []})
    with pytest.raises(ValueError):
        grid_search_fit(lambda p: {}, data, {"x": [0]}, "aic")


def test_fit_skips_degenerate_points():
    data = rows([0.1, 0.5, 0.9])
    table = {0: {("w", f"o{i}"): 0.3 for i in range(3)},
             1: {("w", "o0"): 0.0, ("w", "o1"): 0.4, ("w", "o2"): 1.0}}
    res = grid_search_fit(table_runner(table), data, {"x": [0, 1]})
    assert res.best_params == {"x": 1}
    assert res.grid[0][1] is None


def test_fit_measure_filter():
    data = rows([0.1, 0.5, 0.9]) + rows([0.9, 0.5, 0.1], "hover")
    pred = {("w", "o0"): 0.0, ("w", "o1"): 1.0, ("w", "o2"): 2.0}
    assert grid_search_fit(lambda p: pred, data, {"x": [0]}, measure="hover").objective_value == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        grid_search_fit(lambda p: pred, data, {"x": [0]})


def test_human_data_round_trip(tmp_path):
    path = tmp_path / "h.csv"
    data = rows([0.25, 1.0]) + rows([3.5], "hover")
    write_human_data(path, data)
    assert load_human_data(path) == data


def test_human_data_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("world_id,object_id,participant_id,measure,value\nw,o,p,recall,0.5\nw,o,p,smell,1\n")
    with pytest.raises(DataFileError, match="row 3"):
        load_human_data(bad)
    bad.write_text("world_id,object_id\nw,o\n")
    with pytest.raises(DataFileError):
        load_human_data(bad)


def test_collision_probabilities_bounds():
    for w in (gen_plinko(3), chute_world()):
        probs = collision_probabilities(w, TABLE_NOISE, EngineConfig(), 30, 0)
        assert set(probs) == set(w.object_ids)
        assert all(0.0 <= p <= 1.0 for p in probs.values())
    assert probs["target"] == 1.0


def test_runner_recall_link_and_gamma_direction():
    worlds = {f"g{s}": gen_gridworld(s) for s in range(2)}
    runner = ModelRunner("jit", worlds, "recall", rollouts=30, seed=4)
    low, high = runner({"gamma": 0.0}), runner({"gamma": 2.0})
    assert set(low) == set(high)
    assert all(0.5 <= v <= 1.0 for v in low.values())
    assert all(low[k] >= high[k] for k in low)
    assert runner({"gamma": 0.5}) == runner({"gamma": 0.5})


def test_runner_vgc_and_probes():
    worlds = {"g0": gen_gridworld(0)}
    vgc = ModelRunner("vgc", worlds, "hover", rollouts=3, seed=1, vgc=VgcParams(luce_alpha=0.1))
    out = vgc({"luce_alpha": 0.5})
    assert set(out) == {("g0", o) for o in worlds["g0"].object_ids}
    assert all(0.0 <= v <= 1.0 for v in out.values())
    with pytest.raises(ValueError):
        ModelRunner("oracle", worlds)({})
    with pytest.raises(ValueError):
        ModelRunner("jit", worlds, "collision")({})


def test_runner_signal_probe():
    from construal_sim.baselines import ProbePair
    w = gen_plinko(5)
    oid = w.object_ids[0]
    runner = ModelRunner("signal", {"p5": w}, "recall", rollouts=20, seed=2, jit=JitParams(),
                         noise=TABLE_NOISE, probes=[ProbePair("p5", oid, 20.0, 0.0), ProbePair("zz", oid, 20.0, 0.0)])
    out = runner({"kappa_sd": 20.0, "choice_alpha": 1.0})
    assert list(out) == [("p5", oid)]
    assert 0.5 <= out[("p5", oid)] < 1.0

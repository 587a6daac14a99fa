import pytest

from construal_sim.errors import ParamFileError
from construal_sim.params import (
    KNOWN_KEYS, ModelSettings, format_params, load_grid, load_params, parse_grid, parse_params,
)
from construal_sim.physics import NoiseParams


def test_parse_params_basic():
    text = "# noise\nsigma_sq = 5\n\nkappa=0.8  # concentration\nn_rollouts=200\nutility=tv\n"
    assert parse_params(text) == {"sigma_sq": 5.0, "kappa": 0.8, "n_rollouts": 200, "utility": "tv"}
    assert isinstance(parse_params("n_rollouts=3")["n_rollouts"], int)


@pytest.mark.parametrize("text, needle", [
    ("gamma=1\ngama=2\n", "<params>:2"),
    ("gamma=1\ngamma=2\n", "duplicate"),
    ("gamma=high\n", "not a number"),
    ("n_rollouts=2.5\n", "not a number"),
    ("utility=kl\n", "w1 or tv"),
    ("gamma\n", "key=value"),
])
def test_parse_params_errors(text, needle):
    with pytest.raises(ParamFileError, match=needle):
        parse_params(text)


def test_parse_grid():
    g = parse_grid("gamma=0,0.5, 1\nsigma_sq=5\n")
    assert g == {"gamma": [0.0, 0.5, 1.0], "sigma_sq": [5.0]}
    with pytest.raises(ParamFileError, match="no values"):
        parse_grid("gamma=\n")
    with pytest.raises(ParamFileError, match="<grid>:1"):
        parse_grid("gamme=1,2\n")


def test_files_round_trip(tmp_path):
    values = {"gamma": 0.25, "kappa": 1.6, "replan_cap": 7, "utility": "w1"}
    path = tmp_path / "p.txt"
    path.write_text(format_params(values))
    assert load_params(path) == values
    grid = tmp_path / "g.txt"
    grid.write_text("gamma=0,1\n")
    assert load_grid(grid) == {"gamma": [0.0, 1.0]}
    with pytest.raises(ParamFileError, match=str(path)):
        path.write_text("bogus=1\n")
        load_params(path)
    with pytest.raises(OSError):
        load_params(tmp_path / "missing.txt")


def test_model_settings_from_dict():
    base = ModelSettings(noise=NoiseParams(5.0, 0.8, 0.6))
    s = ModelSettings.from_dict({"gamma": 0.5, "kappa": 3.2, "luce_alpha": 2.0, "tv_scale": 4.0}, base)
    assert s.jit.gamma == 0.5 and s.noise.kappa == 3.2 and s.noise.sigma_sq == 5.0
    assert s.vgc.luce_alpha == 2.0 and s.extra == {"tv_scale": 4.0}
    assert ModelSettings.from_dict({}, base) == base


def test_model_settings_rejects_bad_values():
    with pytest.raises(ParamFileError):
        ModelSettings.from_dict({"luce_alpha": 0.0})
    with pytest.raises(ParamFileError):
        ModelSettings.from_dict({"gamma": -1.0})
    with pytest.raises(ParamFileError, match="unknown"):
        ModelSettings.from_dict({"colour": 1.0})


def test_every_known_key_parses():
    for key in sorted(KNOWN_KEYS - {"utility"}):
        assert key in parse_params(f"{key}=1\n")

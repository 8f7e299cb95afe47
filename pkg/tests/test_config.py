import json

import pytest

from selective_eval.config import ConfigError, RunConfig, load_config, parse_rank_key
from selective_eval.scores import EnergyProfile, ParamRatio, ProcessUsage


def test_defaults():
    cfg = RunConfig()
    assert cfg.disca_weights.x == cfg.disca_weights.y == cfg.disca_weights.z == 1 / 3
    assert cfg.thresholds == (0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6, 0.55)
    assert cfg.score_threshold == 0.9


def test_dict_round_trip():
    cfg = RunConfig(
        computation={"a": ParamRatio(1, 2), "b": EnergyProfile(1.5, (ProcessUsage(p_cpu=1, e_cpu=3),))},
        resample_bins=50,
        rank_key="disca@0.85",
    )
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("obj, fragment", [
    ({"weights": {}}, "unknown config key"),
    ({"disca_weights": {"x": 0.3, "y": 0.3, "z": 0.3}}, "sum"),
    ({"disca_weights": {"x": 1, "w": 0}}, "unknown key"),
    ({"thresholds": [0.9, 0.95]}, "decreasing"),
    ({"thresholds": ["0.9"]}, "number"),
    ({"score_threshold": 0.3}, "score_threshold"),
    ({"resample_bins": 0}, "resample_bins"),
    ({"rank_key": "f1"}, "rank key"),
    ({"plateau": {"band_width": 0}}, "band_width"),
    ({"computation": {"m": {"param_ratio": {"optimal_params": 1}}}}, "param_ratio"),
    ([], "object"),
])
def test_rejections(obj, fragment):
    with pytest.raises(ConfigError, match=fragment):
        RunConfig.from_dict(obj)


def test_overrides():
    cfg = RunConfig().with_overrides(x=0.5, y=0.25, z=0.25, band_width=0.1, rank_key="auc", q=None)
    assert (cfg.disca_weights.x, cfg.plateau.band_width, cfg.rank_key) == (0.5, 0.1, "auc")
    assert cfg.composition == RunConfig().composition
    assert RunConfig().with_overrides() == RunConfig()
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(x=0.5)


def test_rank_key_parsing():
    assert parse_rank_key("disca@0.85") == ("disca", 0.85)
    assert parse_rank_key("auc") == ("auc", None)
    with pytest.raises(ConfigError):
        parse_rank_key("auc@0.9")
    with pytest.raises(ConfigError):
        parse_rank_key("disca@x")
    assert RunConfig(rank_key="disca").disca_key_threshold() == 0.9


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"score_threshold": 0.8}')
    assert load_config(p).score_threshold == 0.8
    p.write_text("{nope")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(p)

import json

import pytest

from crngame.config import ConfigError, load_config
from crngame.game import ConstantCount, Indifferent, TakeoverSuccess, UniformCount

INI_TEXT = """
[player:main]
crn = main.crn
utility = takeover X Y
init.A = 100
init.B = 90..110

[player:nature]
crn = nature.crn

[sweep]
pair = X Y
total = 1000
diffs = 0:40:20
trials = 50

[simulation]
seed = 7
volume = 2.0
confidence = 0.95
catalytic = true
engine = batch
threads = 2

[output]
csv = out.csv
svg = out.svg
"""


@pytest.fixture
def config_dir(tmp_path):
    (tmp_path / "main.crn").write_text(
        "2X + Y + A -> 3X + A @ 1\nX + 2Y + B -> 3Y + B @ 1\n"
        "init A = 1\ninit B = 1\n")
    (tmp_path / "nature.crn").write_text("A -> B @ 1e9\nB -> A @ 1e9\n")
    return tmp_path


class TestIniConfig:
    def test_full_roundtrip(self, config_dir):
        path = config_dir / "exp.ini"
        path.write_text(INI_TEXT)
        cfg = load_config(path)
        assert [p.name for p in cfg.players] == ["main", "nature"]
        assert cfg.players[0].utility == TakeoverSuccess("X", "Y")
        assert cfg.players[1].utility == Indifferent()
        assert cfg.pair == ("X", "Y")
        assert cfg.total == 1000
        assert cfg.diffs == [0, 20, 40]
        assert cfg.trials == 50
        assert cfg.seed == 7
        assert cfg.volume == 2.0
        assert cfg.confidence == 0.95
        assert cfg.catalytic is True
        assert cfg.threads == 2
        assert cfg.csv_path == "out.csv" and cfg.svg_path == "out.svg"

    def test_init_overrides_beat_file_inits(self, config_dir):
        path = config_dir / "exp.ini"
        path.write_text(INI_TEXT)
        cfg = load_config(path)
        player = cfg.players[0].build_player()
        entries = dict(zip(player.strategy.species.names,
                           player.initial_distribution.entries))
        assert entries["A"] == ConstantCount(100)
        assert entries["B"] == UniformCount(90, 110)
        assert entries["X"] == ConstantCount(0)

    def test_rejected_and_accepted_diffs(self, config_dir):
        text = INI_TEXT.replace("diffs = 0:40:20", "diffs = 0, 15, 20")
        (config_dir / "exp.ini").write_text(text)
        cfg = load_config(config_dir / "exp.ini")
        assert cfg.accepted_diffs() == [0, 20]
        assert cfg.rejected_diffs() == [15]

    def test_conditions_pin_the_pair(self, config_dir):
        (config_dir / "exp.ini").write_text(INI_TEXT)
        cfg = load_config(config_dir / "exp.ini")
        conditions = cfg.conditions()
        assert [c.label for c in conditions] == ["0", "20", "40"]
        player = cfg.players[0].build_player()
        x_index = player.strategy.species.index_of("X")
        y_index = player.strategy.species.index_of("Y")
        assert conditions[1].distribution.entries[x_index] == ConstantCount(510)
        assert conditions[1].distribution.entries[y_index] == ConstantCount(490)

    @pytest.mark.parametrize("mutation,fragment", [
        (("crn = main.crn", "crn = missing.crn"), "missing.crn"),
        (("pair = X Y", "pair = X"), "two species"),
        (("pair = X Y", "pair = X Q"), "not in player"),
        (("trials = 50", "trials = 0"), "trials"),
        (("utility = takeover X Y", "utility = maximize X"), "utility"),
        (("engine = batch", "engine = warp"), "engine"),
        (("catalytic = true", "catalytic = maybe"), "boolean"),
        (("diffs = 0:40:20", "diffs = 0:40:0"), "step"),
    ])
    def test_bad_configs_rejected(self, config_dir, mutation, fragment):
        old, new = mutation
        (config_dir / "exp.ini").write_text(INI_TEXT.replace(old, new))
        with pytest.raises((ConfigError, FileNotFoundError)) as err:
            load_config(config_dir / "exp.ini")
        assert fragment.lower() in str(err.value).lower()

    def test_missing_sweep_section(self, config_dir):
        (config_dir / "exp.ini").write_text(
            "[player:main]\ncrn = main.crn\n")
        with pytest.raises(ConfigError):
            load_config(config_dir / "exp.ini")


class TestJsonConfig:
    def test_equivalent_to_ini(self, config_dir):
        data = {
            "players": [
                {"name": "main", "crn": "main.crn", "utility": "takeover X Y",
                 "init": {"A": 100, "B": "90..110"}},
                {"name": "nature", "crn": "nature.crn"},
            ],
            "sweep": {"pair": "X Y", "total": 1000, "diffs": [0, 20, 40],
                      "trials": 50},
            "simulation": {"seed": 7, "volume": 2.0, "confidence": 0.95,
                           "catalytic": True, "engine": "batch", "threads": 2},
            "output": {"csv": "out.csv", "svg": "out.svg"},
        }
        (config_dir / "exp.json").write_text(json.dumps(data))
        (config_dir / "exp.ini").write_text(INI_TEXT)
        a = load_config(config_dir / "exp.json")
        b = load_config(config_dir / "exp.ini")
        assert [p.name for p in a.players] == [p.name for p in b.players]
        assert a.diffs == b.diffs
        assert a.seed == b.seed
        assert a.players[0].init_overrides == b.players[0].init_overrides

    def test_diff_range_string_accepted(self, config_dir):
        data = {
            "players": [{"name": "m", "crn": "main.crn",
                         "utility": "takeover X Y"}],
            "sweep": {"pair": "X Y", "total": 100, "diffs": "0:10:5",
                      "trials": 5},
        }
        (config_dir / "exp.json").write_text(json.dumps(data))
        assert load_config(config_dir / "exp.json").diffs == [0, 5, 10]

    def test_bad_json_rejected(self, config_dir):
        (config_dir / "exp.json").write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(config_dir / "exp.json")

    def test_json_must_be_object(self, config_dir):
        (config_dir / "exp.json").write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_config(config_dir / "exp.json")


def test_shipped_default_config_loads():
    from crngame.config import resolve_input_path

    cfg = load_config(resolve_input_path("pkg:default_sweep.ini"))
    assert cfg.total == 1000
    assert cfg.trials == 500
    assert cfg.accepted_diffs() == list(range(0, 101, 10))
    assert cfg.catalytic is True

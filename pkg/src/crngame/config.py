"""Experiment configuration: players, sweep definition, runtime settings.

Configs are INI files (sections of flat key = value pairs) or, equivalently,
JSON objects; ``.json`` files and texts starting with ``{`` take the JSON
path. The full schema, with every key and default, is documented in the
README. The shipped configs under ``crngame/data`` are working references;
any ``crn = `` path may use the ``pkg:`` prefix to name one of those data
files, otherwise paths resolve relative to the config file.

The sweep varies the initial difference ``d`` between a designated species
pair at fixed total ``n``: each condition starts the pair at
``(n + d) / 2`` and ``(n - d) / 2``. Conditions where ``n + d`` is odd are
rejected at load time (silent rounding would bias the tie condition) and
reported alongside the accepted ones.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .core import CrnError
from .crnfile import CrnDocument, load as load_crn
from .game import (
    Condition,
    ConstantCount,
    CountDistribution,
    Indifferent,
    InitialDistribution,
    Player,
    TakeoverSuccess,
    UniformCount,
    UtilitySpec,
)
from .ssa import SimConfig


class ConfigError(CrnError):
    """Malformed or inconsistent experiment configuration."""


def resolve_input_path(spec: str, base_dir: Path | None = None) -> Path:
    """Resolve a config-referenced path; ``pkg:NAME`` names a shipped data file."""
    if spec.startswith("pkg:"):
        name = spec[len("pkg:"):]
        path = resources.files("crngame.data").joinpath(name)
        return Path(str(path))
    path = Path(spec)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return path


def _parse_utility(text: str) -> UtilitySpec:
    parts = text.split()
    if parts == ["indifferent"]:
        return Indifferent()
    if len(parts) == 3 and parts[0] == "takeover":
        return TakeoverSuccess(parts[1], parts[2])
    raise ConfigError(f"bad utility {text!r}: expected 'indifferent' "
                      f"or 'takeover <X> <Y>'")


def _parse_count_distribution(text: str) -> CountDistribution:
    text = text.strip()
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
        try:
            return UniformCount(int(lo_text), int(hi_text))
        except ValueError as exc:
            raise ConfigError(f"bad count range {text!r}") from exc
    try:
        return ConstantCount(int(text))
    except ValueError as exc:
        raise ConfigError(f"bad count {text!r}") from exc


def _parse_diffs(text) -> list[int]:
    if isinstance(text, list):
        return [int(d) for d in text]
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad diff range {text!r}: expected start:stop:step")
        start, stop, step = (int(p) for p in parts)
        if step <= 0:
            raise ConfigError("diff step must be positive")
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.replace(",", " ").split()]


@dataclass
class PlayerConfig:
    name: str
    crn_source: str
    document: CrnDocument
    utility: UtilitySpec
    init_overrides: dict[str, CountDistribution] = field(default_factory=dict)

    def build_player(self) -> Player:
        table = self.document.crn.species
        entries: list[CountDistribution] = []
        for name in table.names:
            if name in self.init_overrides:
                entries.append(self.init_overrides[name])
            else:
                entries.append(ConstantCount(self.document.initial_counts.get(name, 0)))
        return Player(self.document.crn, InitialDistribution(tuple(entries)),
                      self.utility, self.name)


@dataclass
class ExperimentConfig:
    """Everything a sweep or robustness run needs, fully resolved."""

    players: list[PlayerConfig]
    pair: tuple[str, str]
    total: int
    diffs: list[int]
    trials: int
    seed: int
    volume: float = 1.0
    max_time: float | None = None
    max_events: int | None = None
    confidence: float = 0.99
    catalytic: bool = False
    engine: str = "batch"
    threads: int = 1
    csv_path: str | None = None
    svg_path: str | None = None

    def __post_init__(self):
        if not self.players:
            raise ConfigError("at least one [player:*] section is required")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.total < 0:
            raise ConfigError("total must be nonnegative")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError("confidence must lie in (0, 1)")
        if self.engine not in ("batch", "reference"):
            raise ConfigError(f"unknown engine {self.engine!r}")
        first = self.players[0]
        for name in self.pair:
            if name not in first.document.crn.species:
                raise ConfigError(
                    f"sweep pair species {name!r} is not in player "
                    f"{first.name!r}'s CRN")

    def sim_config(self, seed: int | None = None) -> SimConfig:
        return SimConfig(volume=self.volume, max_time=self.max_time,
                         max_events=self.max_events,
                         seed=self.seed if seed is None else seed)

    def accepted_diffs(self) -> list[int]:
        return [d for d in self.diffs if (self.total + d) % 2 == 0]

    def rejected_diffs(self) -> list[int]:
        return [d for d in self.diffs if (self.total + d) % 2 == 1]

    def conditions(self) -> list[Condition]:
        """One condition per accepted diff, pinning the pair's initial counts."""
        player = self.players[0].build_player()
        x_name, y_name = self.pair
        out = []
        for d in self.accepted_diffs():
            x0 = (self.total + d) // 2
            y0 = (self.total - d) // 2
            varied = player.with_counts({x_name: x0, y_name: y0})
            out.append(Condition(str(d), varied.initial_distribution))
        return out

    def main_player(self) -> Player:
        return self.players[0].build_player()

    def opponent_players(self) -> list[Player]:
        return [p.build_player() for p in self.players[1:]]


def _sections_from_ini(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # species names in init.* keys are case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config syntax: {exc}") from exc
    return {name: dict(parser.items(name)) for name in parser.sections()}


def _sections_from_json(text: str) -> dict[str, dict[str, str]]:
    """Normalize the JSON encoding onto the INI section layout."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("JSON config must be an object")
    sections: dict[str, dict[str, str]] = {}
    players = data.get("players", [])
    if not isinstance(players, list):
        raise ConfigError("'players' must be a list")
    for i, entry in enumerate(players):
        if not isinstance(entry, dict):
            raise ConfigError("each player must be an object")
        name = str(entry.get("name", f"player{i + 1}"))
        section: dict[str, str] = {}
        if "crn" in entry:
            section["crn"] = str(entry["crn"])
        if "utility" in entry:
            section["utility"] = str(entry["utility"])
        for species, value in (entry.get("init") or {}).items():
            section[f"init.{species}"] = str(value)
        sections[f"player:{name}"] = section
    for key in ("sweep", "simulation", "output"):
        block = data.get(key)
        if block is None:
            continue
        if not isinstance(block, dict):
            raise ConfigError(f"'{key}' must be an object")
        sections[key] = {
            k: (v if isinstance(v, list) else str(v)) for k, v in block.items()
        }
    return sections


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _as_bool(value: str, key: str) -> bool:
    lowered = str(value).strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"bad boolean for {key}: {value!r}")


def load_config_text(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        sections = _sections_from_json(text)
    else:
        sections = _sections_from_ini(text)

    players: list[PlayerConfig] = []
    for section_name, body in sections.items():
        if not section_name.startswith("player:"):
            continue
        name = section_name[len("player:"):]
        if "crn" not in body:
            raise ConfigError(f"[{section_name}] is missing crn = <path>")
        source = body["crn"]
        document = load_crn(resolve_input_path(source, base_dir))
        utility = _parse_utility(body.get("utility", "indifferent"))
        overrides = {}
        for key, value in body.items():
            if key.startswith("init."):
                overrides[key[len("init."):]] = _parse_count_distribution(value)
        players.append(PlayerConfig(name, source, document, utility, overrides))

    sweep = sections.get("sweep")
    if sweep is None:
        raise ConfigError("missing [sweep] section")
    for key in ("pair", "total", "diffs", "trials"):
        if key not in sweep:
            raise ConfigError(f"[sweep] is missing {key}")
    pair_parts = str(sweep["pair"]).split()
    if len(pair_parts) != 2:
        raise ConfigError("sweep pair must name two species, e.g. 'X Y'")

    sim = sections.get("simulation", {})
    out = sections.get("output", {})
    max_time = sim.get("max_time")
    max_events = sim.get("max_events")
    return ExperimentConfig(
        players=players,
        pair=(pair_parts[0], pair_parts[1]),
        total=int(sweep["total"]),
        diffs=_parse_diffs(sweep["diffs"]),
        trials=int(sweep["trials"]),
        seed=int(sim.get("seed", 0)),
        volume=float(sim.get("volume", 1.0)),
        max_time=float(max_time) if max_time is not None else None,
        max_events=int(max_events) if max_events is not None else None,
        confidence=float(sim.get("confidence", 0.99)),
        catalytic=_as_bool(sim.get("catalytic", "false"), "catalytic"),
        engine=str(sim.get("engine", "batch")),
        threads=int(sim.get("threads", 1)),
        csv_path=out.get("csv"),
        svg_path=out.get("svg"),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json" and not text.lstrip().startswith("{"):
        raise ConfigError(f"{path}: .json config must contain a JSON object")
    return load_config_text(text, base_dir=path.parent)

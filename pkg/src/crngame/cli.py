"""Command-line front end.

Subcommands: ``simulate`` (one trajectory), ``sweep`` (CSV/SVG over the
configured conditions), ``robustness`` (per-condition ratios plus a
PASS/FAIL/INCONCLUSIVE verdict for a queried threshold), ``oracle`` (exact
absorption probabilities for small systems), and ``fmt`` (canonicalize a
``.crn`` file). Exit codes: 0 success, 1 usage or configuration error,
2 runtime error, 3 robustness verdict FAIL.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import crnfile
from .config import ConfigError, ExperimentConfig, load_config, resolve_input_path
from .core import Crn, CrnError, NumericOverflowError
from .experiment import robustness_summary, run_robustness, run_sweep
from .game import (
    GameConfigError,
    Indifferent,
    InitialDistribution,
    Player,
    compose,
)
from .oracle import (
    NoAbsorptionError,
    StateSpaceTooLargeError,
    absorption_probabilities,
    enumerate_states,
)
from .ssa import SimConfig, TrajectoryDumpObserver, ZeroCountMonitor, simulate
from .svg import sweep_svg

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_ROBUSTNESS_FAIL = 3


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (overrides config)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes; 0 = one per CPU")
    common.add_argument("--volume", type=float, default=None,
                        help="solution volume for propensities (default 1)")
    common.add_argument("--max-time", type=float, default=None,
                        help="stop a trajectory after this much simulated time")
    common.add_argument("--max-events", type=int, default=None,
                        help="stop a trajectory after this many reaction events")
    common.add_argument("--out", default=None, help="output path (CSV or text)")
    common.add_argument("--svg", default=None, help="also write an SVG plot here")
    common.add_argument("--confidence", type=float, default=None,
                        help="confidence level for intervals, in (0, 1)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crngame",
        description="Stochastic CRN games: simulation, sweeps, robustness.")
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="run one trajectory of the union of CRN files")
    p_sim.add_argument("crn_files", nargs="+", metavar="FILE.crn")
    p_sim.add_argument("--init", action="append", default=[],
                       metavar="SPECIES=COUNT",
                       help="override an initial count (repeatable)")
    p_sim.add_argument("--takeover", nargs=2, metavar=("X", "Y"),
                       help="stop once either species count reaches zero")
    p_sim.add_argument("--dump", default=None,
                       help="write the trajectory dump here ('-' for stdout)")

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="run the configured sweep; write CSV (+SVG)")
    p_sweep.add_argument("config", help="experiment config (.ini or .json)")

    p_rob = sub.add_parser("robustness", parents=[common],
                           help="estimate per-condition utility ratios")
    p_rob.add_argument("config", help="experiment config (.ini or .json)")
    p_rob.add_argument("--alpha", type=float, default=None,
                       help="robustness threshold to gate on")
    p_rob.add_argument("--paired-seeds", action="store_true",
                       help="reuse the with-opponents seeds in the baseline arm")

    p_oracle = sub.add_parser("oracle", parents=[common],
                              help="exact absorption probabilities (small systems)")
    p_oracle.add_argument("crn_file", metavar="FILE.crn")
    p_oracle.add_argument("--init", action="append", default=[],
                          metavar="SPECIES=COUNT")
    p_oracle.add_argument("--winner", required=True,
                          help="success = absorbing states where this species "
                               "outnumbers --loser")
    p_oracle.add_argument("--loser", required=True)
    p_oracle.add_argument("--cap", type=int, default=10**6,
                          help="abort if more states are reachable")
    p_oracle.add_argument("--all", action="store_true",
                          help="print one line per reachable state")

    p_fmt = sub.add_parser("fmt", parents=[common],
                           help="canonicalize a .crn file")
    p_fmt.add_argument("crn_file", metavar="FILE.crn")
    return parser


def _parse_init_overrides(pairs: list[str]) -> dict[str, int]:
    out = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise ConfigError(f"bad --init {pair!r}: expected SPECIES=COUNT")
        try:
            count = int(value)
        except ValueError:
            raise ConfigError(f"bad --init count {value!r}") from None
        if count < 0:
            raise ConfigError("--init counts must be nonnegative")
        out[name] = count
    return out


def _resolve_threads(threads: int | None, config_threads: int = 1) -> int:
    value = config_threads if threads is None else threads
    if value == 0:
        return os.cpu_count() or 1
    if value < 0:
        raise ConfigError("--threads must be >= 0")
    return value


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.volume is not None:
        updates["volume"] = args.volume
    if args.max_time is not None:
        updates["max_time"] = args.max_time
    if args.max_events is not None:
        updates["max_events"] = args.max_events
    if args.confidence is not None:
        updates["confidence"] = args.confidence
    if args.threads is not None:
        updates["threads"] = args.threads
    if args.out is not None:
        updates["csv_path"] = args.out
    if args.svg is not None:
        updates["svg_path"] = args.svg
    return replace(config, **updates) if updates else config


def _load_merged_crn(paths: list[str]) -> tuple[Crn, np.ndarray]:
    """Union the files' CRNs and sum their declared initial counts."""
    players = []
    for i, spec in enumerate(paths):
        doc = crnfile.load(resolve_input_path(spec))
        table = doc.crn.species
        dist = InitialDistribution.deterministic(
            [doc.initial_counts.get(n, 0) for n in table.names])
        players.append(Player(doc.crn, dist, Indifferent(), f"file{i}"))
    game = compose(players)
    state = game.crn.species.zero_state()
    for player, emb in zip(game.players, game.embeddings):
        if emb.size:
            counts = [e.value for e in player.initial_distribution.entries]
            state[emb] += np.asarray(counts, dtype=np.int64)
    return game.crn, state


def _cmd_simulate(args) -> int:
    crn, state = _load_merged_crn(args.crn_files)
    for name, count in _parse_init_overrides(args.init).items():
        state[crn.species.index_of(name)] = count
    config = SimConfig(
        volume=args.volume if args.volume is not None else 1.0,
        max_time=args.max_time,
        max_events=args.max_events,
        seed=args.seed if args.seed is not None else 0,
    )
    observers = []
    dump_handle = None
    if args.dump is not None:
        dump_handle = sys.stdout if args.dump == "-" else open(args.dump, "w")
        observers.append(TrajectoryDumpObserver(dump_handle, crn.species.names))
    if args.takeover:
        observers.append(ZeroCountMonitor(
            tuple(crn.species.index_of(n) for n in args.takeover)))
    try:
        result = simulate(crn, state, config, observers)
    finally:
        if dump_handle is not None and dump_handle is not sys.stdout:
            dump_handle.close()
    names = crn.species.names
    print("species:", " ".join(names))
    print("final-state:", " ".join(f"{n}={c}" for n, c in
                                   zip(names, result.final_state)))
    print("stop-reason:", result.stop_reason.value)
    print("events:", result.events)
    print("elapsed:", repr(result.elapsed))
    return EXIT_OK


def _write_outputs(output, csv_path: str | None, svg_path: str | None) -> None:
    csv_text = output.to_csv()
    if csv_path:
        Path(csv_path).write_text(csv_text, encoding="utf-8", newline="\n")
        print(f"wrote {csv_path} ({len(output.rows)} rows)")
    else:
        sys.stdout.write(csv_text)
    if svg_path:
        Path(svg_path).write_text(sweep_svg(output.rows), encoding="utf-8",
                                  newline="\n")
        print(f"wrote {svg_path}")


def _cmd_sweep(args) -> int:
    config = _apply_overrides(load_config(resolve_input_path(args.config)), args)
    workers = _resolve_threads(args.threads, config.threads)
    output = run_sweep(config, workers=workers)
    _write_outputs(output, config.csv_path, config.svg_path)
    return EXIT_OK


def _cmd_robustness(args) -> int:
    config = _apply_overrides(load_config(resolve_input_path(args.config)), args)
    workers = _resolve_threads(args.threads, config.threads)
    report, output = run_robustness(config, args.alpha,
                                    paired_seeds=args.paired_seeds,
                                    workers=workers)
    if config.csv_path or config.svg_path:
        _write_outputs(output, config.csv_path, config.svg_path)
    for cond in report.conditions:
        ratio = "undefined" if cond.ratio is None else repr(cond.ratio)
        lo = "" if cond.ratio_lower is None else f" lo={cond.ratio_lower!r}"
        hi = "" if cond.ratio_upper is None else f" hi={cond.ratio_upper!r}"
        print(f"condition d={cond.label} ratio={ratio}{lo}{hi} "
              f"verdict={cond.verdict}")
    print(robustness_summary(report))
    return EXIT_ROBUSTNESS_FAIL if report.verdict == "FAIL" else EXIT_OK


def _cmd_oracle(args) -> int:
    doc = crnfile.load(resolve_input_path(args.crn_file))
    table = doc.crn.species
    counts = dict(doc.initial_counts)
    counts.update(_parse_init_overrides(args.init))
    state = table.state_from(counts)
    volume = args.volume if args.volume is not None else 1.0
    winner = table.index_of(args.winner)
    loser = table.index_of(args.loser)
    space = enumerate_states(doc.crn, state, volume, state_cap=args.cap)
    probs = absorption_probabilities(space, lambda s: s[winner] > s[loser])
    print(f"p = {probs[0]:#.12g}")
    if args.all:
        for i in range(len(space)):
            cells = " ".join(f"{n}={c}" for n, c in zip(table.names, space.states[i]))
            print(f"{cells} p={probs[i]:#.12g}")
    return EXIT_OK


def _cmd_fmt(args) -> int:
    doc = crnfile.load(resolve_input_path(args.crn_file))
    text = crnfile.serialize(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "robustness": _cmd_robustness,
    "oracle": _cmd_oracle,
    "fmt": _cmd_fmt,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except crnfile.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, GameConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateSpaceTooLargeError as exc:
        print(f"error: {exc}; use the stochastic simulator "
              f"(simulate / sweep) instead", file=sys.stderr)
        return EXIT_RUNTIME
    except (NoAbsorptionError, NumericOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except CrnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Stochastic chemical-reaction-network games and robustness estimation.

The package simulates CRNs under stochastic mass-action kinetics (exact
direct-method SSA), composes multi-player CRN games, validates catalytic
interaction structure, solves small systems exactly for ground truth, and
estimates how robust a strategy's expected utility is to interference from
opponent CRNs. A command-line front end (``crngame``) drives experiment
sweeps from config files and emits CSV results and SVG plots.
"""

from .core import (
    Crn,
    CrnError,
    NumericOverflowError,
    Reaction,
    SpeciesTable,
    apply_reaction,
    is_applicable,
    is_catalyst,
    make_crn,
    propensity,
)
from .crnfile import CrnDocument, ParseError, parse, serialize
from .game import (
    ComposedGame,
    Condition,
    ConditionResult,
    ConstantCount,
    GameConfigError,
    Indifferent,
    InitialDistribution,
    Player,
    RobustnessReport,
    TakeoverSuccess,
    UniformCount,
    UtilityEstimate,
    compose,
    estimate_expected_utility,
    estimate_robustness,
    evaluate_utility,
    infer_catalytic_partition,
    sample_initial_state,
    validate_catalytic,
)
from .oracle import (
    NoAbsorptionError,
    StateSpace,
    StateSpaceTooLargeError,
    absorption_probabilities,
    enumerate_states,
)
from .rng import Xoshiro256, XoshiroBatch, child_seed
from .ssa import (
    Observer,
    SimConfig,
    SimResult,
    StopReason,
    TrajectoryEvent,
    TrajectoryRecorder,
    ZeroCountMonitor,
    run_trials,
    simulate,
    step,
    total_rate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

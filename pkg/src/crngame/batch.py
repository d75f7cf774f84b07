"""Lockstep vectorized twin of the scalar simulation engine.

Runs many independent trials simultaneously, one numpy lane per trial. Each
lane consumes its own xoshiro256** stream in exactly the per-step order used
by :func:`crngame.ssa.simulate` (one uniform for the sojourn, one for the
reaction choice, none once stopped), propensities multiply factors in the
same order, and the exit rate is the same left-to-right sum, so a lane
reproduces the scalar engine's integer trajectory bit for bit. Elapsed
times can differ from the scalar engine in the last ulp because numpy's
vector log and libm may round differently; counts, event counts, and stop
reasons never differ.

The batch engine supports no general observers; its one stop hook is
"a watched species count reached zero", which is what final-state
utilities need. Anything richer belongs on the scalar engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Crn, CrnError, NumericOverflowError
from .rng import XoshiroBatch
from .ssa import SimConfig, StopReason

_REASON_CODES = (
    StopReason.TERMINAL,
    StopReason.TIME_EXHAUSTED,
    StopReason.EVENT_CEILING,
    StopReason.EARLY_STOP,
)


@dataclass
class BatchOutcome:
    """Per-trial outputs, indexed in trial order."""

    final_states: np.ndarray  # (trials, species) int64
    stop_reasons: list[StopReason]
    events: np.ndarray  # (trials,) int64
    elapsed: np.ndarray  # (trials,) float64


def simulate_batch(crn: Crn, initial_states: np.ndarray, config: SimConfig,
                   rng: XoshiroBatch,
                   stop_when_zero: tuple[int, ...] = ()) -> BatchOutcome:
    """Simulate one trial per row of ``initial_states``.

    ``rng`` carries one stream per trial, already advanced past any
    initial-state sampling. ``stop_when_zero`` lists species indices; a
    trial stops with EARLY_STOP as soon as any listed count is zero
    (checked on the initial state and after every event), mirroring a
    zero-count monitor observer on the scalar engine.
    """
    initial_states = np.asarray(initial_states, dtype=np.int64)
    if initial_states.ndim != 2 or initial_states.shape[1] != len(crn.species):
        raise CrnError("initial_states must be (trials, species)")
    if (initial_states < 0).any():
        raise CrnError("initial counts must be nonnegative")
    trials = initial_states.shape[0]
    if rng.size != trials:
        raise CrnError("rng lane count does not match trial count")

    nrxn = len(crn.reactions)
    volume = config.volume
    kv = [r.rate_constant * volume ** (1 - r.arity) for r in crn.reactions]
    terms = [
        tuple((i, need) for i, need in enumerate(r.reactants) if need)
        for r in crn.reactions
    ]
    deltas = np.array([r.delta for r in crn.reactions], dtype=np.float64) \
        if nrxn else np.zeros((0, len(crn.species)))
    max_time = config.max_time if config.max_time is not None else float("inf")
    ceiling = config.event_ceiling

    out_states = np.empty_like(initial_states)
    out_reasons = np.empty(trials, dtype=np.int64)
    out_events = np.zeros(trials, dtype=np.int64)
    out_elapsed = np.zeros(trials, dtype=np.float64)

    # Live arrays hold only still-running trials; idx maps lanes back to
    # trial indices. Counts are exact small integers stored as float64.
    idx = np.arange(trials)
    counts = initial_states.astype(np.float64)
    t = np.zeros(trials)
    ev = np.zeros(trials, dtype=np.int64)

    def retire(mask: np.ndarray, reason_code: int, elapsed=None) -> None:
        done = mask.nonzero()[0]
        orig = idx[done]
        out_states[orig] = counts[done].astype(np.int64)
        out_reasons[orig] = reason_code
        out_events[orig] = ev[done]
        out_elapsed[orig] = t[done] if elapsed is None else elapsed

    def compact(keep_mask: np.ndarray) -> None:
        nonlocal idx, counts, t, ev, rng
        keep = keep_mask.nonzero()[0]
        idx = idx[keep]
        counts = counts[keep]
        t = t[keep]
        ev = ev[keep]
        rng = rng.take(keep)

    if stop_when_zero:
        tripped = np.zeros(trials, dtype=bool)
        for zi in stop_when_zero:
            tripped |= counts[:, zi] == 0.0
        if tripped.any():
            retire(tripped, 3)
            compact(~tripped)

    props = np.empty((nrxn, idx.size))
    # numpy would warn on float overflow; it is detected via the isfinite
    # check below and raised as NumericOverflowError, so silence the warning
    with np.errstate(over="ignore"):
        while idx.size:
            width = idx.size
            if props.shape[1] != width:
                props = np.empty((nrxn, width))
            for ri in range(nrxn):
                p = np.full(width, kv[ri])
                for si, need in terms[ri]:
                    col = counts[:, si]
                    for m in range(need):
                        p = p * (col - m)
                props[ri] = p
            if nrxn:
                total = props[0].copy()
                for ri in range(1, nrxn):
                    total += props[ri]
            else:
                total = np.zeros(width)
            if not np.isfinite(total).all():
                _raise_overflow(props, total, idx)

            terminal = total == 0.0
            if terminal.any():
                retire(terminal, 0)
                keep = ~terminal
                compact(keep)
                props_keep = keep.nonzero()[0]
                props = np.ascontiguousarray(props[:, props_keep])
                total = total[props_keep]
                if not idx.size:
                    break

            dt = -np.log(rng.next_u01()) / total
            if max_time != float("inf"):
                exceeded = t + dt > max_time
                if exceeded.any():
                    retire(exceeded, 1, elapsed=max_time)
                    keep = ~exceeded
                    compact(keep)
                    keep_idx = keep.nonzero()[0]
                    props = np.ascontiguousarray(props[:, keep_idx])
                    total = total[keep_idx]
                    dt = dt[keep_idx]
                    if not idx.size:
                        break
            t += dt

            threshold = rng.next_u01() * total
            cum = props[0].copy()
            chosen = (cum < threshold).astype(np.int64)
            for ri in range(1, nrxn - 1):
                cum += props[ri]
                chosen += cum < threshold
            np.minimum(chosen, nrxn - 1, out=chosen)
            counts += deltas[chosen]
            ev += 1

            stopped = np.zeros(idx.size, dtype=bool)
            if stop_when_zero:
                for zi in stop_when_zero:
                    stopped |= counts[:, zi] == 0.0
            ceiled = (ev >= ceiling) & ~stopped
            if stopped.any():
                retire(stopped, 3)
            if ceiled.any():
                retire(ceiled, 2)
            if stopped.any() or ceiled.any():
                compact(~(stopped | ceiled))

    return BatchOutcome(
        final_states=out_states,
        stop_reasons=[_REASON_CODES[c] for c in out_reasons],
        events=out_events,
        elapsed=out_elapsed,
    )


def _raise_overflow(props: np.ndarray, total: np.ndarray, idx: np.ndarray):
    lane = int((~np.isfinite(total)).nonzero()[0][0])
    bad = (~np.isfinite(props[:, lane])).nonzero()[0]
    rxn = int(bad[0]) if bad.size else -1
    raise NumericOverflowError(
        rxn, f"trial {int(idx[lane])}: non-finite propensity in reaction {rxn}")

"""Core chemical-reaction-network types and stochastic mass-action kinetics.

A CRN is a finite species table plus a set of reactions. Each reaction is a
triple (reactant vector, product vector, rate constant); states are count
vectors over the species table. The propensity of a reaction in a state is
the pure falling-factorial form

    k * V**(1 - arity) * prod_Y x(Y) * (x(Y) - 1) * ... * (x(Y) - r(Y) + 1)

with no division by stoichiometry factorials, e.g. 3Y + Z at rate k has
propensity k*y*(y-1)*(y-2)*z / V**3. Counts are 64-bit integers; rates and
propensities are 64-bit floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

CountVector = np.ndarray  # 1-D int64, one entry per species index


class CrnError(Exception):
    """Base class for CRN construction and evaluation errors."""


class NumericOverflowError(CrnError):
    """A propensity or rate sum left the finite float64 range."""

    def __init__(self, reaction_index: int, message: str | None = None):
        self.reaction_index = reaction_index
        super().__init__(message or f"non-finite propensity in reaction {reaction_index}")


class SpeciesTable(object):
    """Ordered, de-duplicated registry of species identifiers."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        index: dict[str, int] = {}
        for i, name in enumerate(names):
            if not name:
                raise CrnError("species identifiers must be nonempty")
            if name in index:
                raise CrnError(f"duplicate species identifier {name!r}")
            index[name] = i
        self.names = names
        self._index = index

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpeciesTable) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"SpeciesTable({list(self.names)!r})"

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise CrnError(f"unknown species {name!r}") from None

    def zero_state(self) -> CountVector:
        return np.zeros(len(self.names), dtype=np.int64)

    def state_from(self, counts: Mapping[str, int]) -> CountVector:
        """Build a count vector from a name -> count mapping."""
        state = self.zero_state()
        for name, count in counts.items():
            if count < 0:
                raise CrnError(f"negative count for species {name!r}")
            state[self.index_of(name)] = count
        return state


@dataclass(frozen=True)
class Reaction:
    """One stoichiometric reaction: reactant counts, product counts, rate.

    ``reactants`` and ``products`` are dense tuples over the owning species
    table. The reactant and product vectors must differ and the rate
    constant must be positive and finite. ``arity`` (total reactant count)
    and ``delta`` (product minus reactant vector) are derived once.
    """

    reactants: tuple[int, ...]
    products: tuple[int, ...]
    rate_constant: float
    arity: int = field(init=False, compare=False)
    delta: tuple[int, ...] = field(init=False, compare=False)

    def __post_init__(self):
        r, p = self.reactants, self.products
        if len(r) != len(p):
            raise CrnError("reactant/product vectors differ in dimension")
        if any(c < 0 for c in r) or any(c < 0 for c in p):
            raise CrnError("stoichiometric counts must be nonnegative")
        if r == p:
            raise CrnError("reactant and product vectors are equal")
        k = self.rate_constant
        if not (k > 0.0) or k != k or k == float("inf"):
            raise CrnError(f"rate constant must be positive and finite, got {k!r}")
        object.__setattr__(self, "rate_constant", float(k))
        object.__setattr__(self, "arity", sum(r))
        object.__setattr__(self, "delta", tuple(pj - rj for rj, pj in zip(r, p)))

    def reactant_support(self) -> tuple[int, ...]:
        """Species indices with positive reactant count."""
        return tuple(i for i, c in enumerate(self.reactants) if c > 0)

    def changed_species(self) -> tuple[int, ...]:
        """Species indices whose count this reaction changes."""
        return tuple(i for i, d in enumerate(self.delta) if d != 0)

    def is_catalyst(self, species_index: int) -> bool:
        """True iff the species appears with equal positive count on both sides."""
        r = self.reactants[species_index]
        return r > 0 and r == self.products[species_index]


class Crn(object):
    """A species table plus an ordered, duplicate-free tuple of reactions.

    Reaction order is the insertion order; it fixes the reaction indices used
    by the simulators and by trajectory dumps. Equality treats the reaction
    list as a set, per the definition of a CRN.
    """

    __slots__ = ("species", "reactions")

    def __init__(self, species: SpeciesTable, reactions: Iterable[Reaction]):
        reactions = tuple(reactions)
        dim = len(species)
        seen: set[Reaction] = set()
        for rxn in reactions:
            if len(rxn.reactants) != dim:
                raise CrnError("reaction dimension does not match species table")
            if rxn in seen:
                raise CrnError("duplicate reaction (the reaction list is a set)")
            seen.add(rxn)
        self.species = species
        self.reactions = reactions

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Crn)
            and self.species == other.species
            and frozenset(self.reactions) == frozenset(other.reactions)
        )

    def __hash__(self) -> int:
        return hash((self.species, frozenset(self.reactions)))

    def __repr__(self) -> str:
        return f"Crn(species={list(self.species.names)!r}, reactions={len(self.reactions)})"

    @classmethod
    def empty(cls) -> "Crn":
        return cls(SpeciesTable(()), ())

    def is_empty(self) -> bool:
        return not self.species.names and not self.reactions


def _check_dimension(reaction: Reaction, state: CountVector) -> None:
    if len(reaction.reactants) != len(state):
        raise CrnError("reaction and state dimensions differ")


def is_applicable(reaction: Reaction, state: CountVector) -> bool:
    """True iff every reactant count is available in ``state``."""
    _check_dimension(reaction, state)
    for i, need in enumerate(reaction.reactants):
        if need and state[i] < need:
            return False
    return True


def apply_reaction(reaction: Reaction, state: CountVector) -> CountVector:
    """Return ``state + delta`` as a fresh vector.

    Applying a reaction to a state lacking its reactants is a contract
    violation and raises. The simulation engines skip this check; they only
    ever fire reactions with positive propensity.
    """
    if not is_applicable(reaction, state):
        raise CrnError("reaction applied to a state lacking its reactants")
    return state + np.asarray(reaction.delta, dtype=np.int64)


def propensity(reaction: Reaction, state: CountVector, volume: float = 1.0) -> float:
    """Stochastic mass-action rate of ``reaction`` in ``state``.

    Computes k * V**(1-arity) * prod of per-species falling factorials,
    multiplying factors in species order. For integer states the product is
    exactly 0 whenever the reaction is not applicable (some factor hits 0),
    so no applicability branch is needed. Raises
    :class:`NumericOverflowError` if the product leaves the finite range.
    """
    _check_dimension(reaction, state)
    if not volume > 0.0:
        raise CrnError(f"volume must be positive, got {volume!r}")
    p = reaction.rate_constant * volume ** (1 - reaction.arity)
    for i, need in enumerate(reaction.reactants):
        count = float(state[i])
        for m in range(need):
            p *= count - m
    if p != p or p == float("inf"):
        raise NumericOverflowError(-1, "non-finite propensity")
    # A state with fewer counts than required yields a zero factor; never negative.
    return p if p > 0.0 else 0.0


def is_catalyst(reaction: Reaction, species_index: int) -> bool:
    """Module-level alias of :meth:`Reaction.is_catalyst`."""
    if not 0 <= species_index < len(reaction.reactants):
        raise CrnError(f"species index {species_index} out of range")
    return reaction.is_catalyst(species_index)


def make_crn(reaction_specs: Sequence[tuple[Mapping[str, int], Mapping[str, int], float]],
             species_order: Sequence[str] | None = None) -> Crn:
    """Convenience constructor from sparse name -> count mappings.

    Species are registered in first-appearance order (reactants before
    products, reaction by reaction) unless ``species_order`` pins the table.
    """
    if species_order is None:
        names: list[str] = []
        seen: set[str] = set()
        for reactants, products, _ in reaction_specs:
            for name in list(reactants) + list(products):
                if name not in seen:
                    seen.add(name)
                    names.append(name)
    else:
        names = list(species_order)
    table = SpeciesTable(names)
    dim = len(table)
    reactions = []
    for reactants, products, k in reaction_specs:
        r = [0] * dim
        p = [0] * dim
        for name, c in reactants.items():
            r[table.index_of(name)] = c
        for name, c in products.items():
            p[table.index_of(name)] = c
        reactions.append(Reaction(tuple(r), tuple(p), k))
    return Crn(table, reactions)

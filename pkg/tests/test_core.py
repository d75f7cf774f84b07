import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crngame import (
    Crn,
    CrnError,
    Reaction,
    SpeciesTable,
    apply_reaction,
    is_applicable,
    is_catalyst,
    propensity,
)


def state(*counts):
    return np.array(counts, dtype=np.int64)


class TestSpeciesTable:
    def test_roundtrip_index(self):
        table = SpeciesTable(("X", "Y", "A"))
        for i, name in enumerate(table.names):
            assert table.index_of(name) == i

    def test_rejects_duplicates_and_empty(self):
        with pytest.raises(CrnError):
            SpeciesTable(("X", "X"))
        with pytest.raises(CrnError):
            SpeciesTable(("X", ""))

    def test_unknown_species(self):
        with pytest.raises(CrnError):
            SpeciesTable(("X",)).index_of("Y")


class TestReaction:
    def test_arity_and_delta(self):
        rxn = Reaction((2, 1), (3, 0), 1.0)
        assert rxn.arity == 3
        assert rxn.delta == (1, -1)

    def test_rejects_equal_sides(self):
        with pytest.raises(CrnError):
            Reaction((1, 1), (1, 1), 1.0)

    @pytest.mark.parametrize("k", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_bad_rate(self, k):
        with pytest.raises(CrnError):
            Reaction((1, 0), (0, 1), k)

    def test_rejects_negative_counts(self):
        with pytest.raises(CrnError):
            Reaction((-1, 0), (0, 1), 1.0)


class TestCrn:
    def test_rejects_duplicate_reactions(self):
        rxn = Reaction((1, 0), (0, 1), 1.0)
        with pytest.raises(CrnError):
            Crn(SpeciesTable(("X", "Y")), (rxn, Reaction((1, 0), (0, 1), 1.0)))

    def test_parallel_reactions_with_distinct_rates_allowed(self):
        crn = Crn(SpeciesTable(("X", "Y")),
                  (Reaction((1, 0), (0, 1), 1.0), Reaction((1, 0), (0, 1), 2.0)))
        assert len(crn.reactions) == 2

    def test_empty_crn(self):
        crn = Crn.empty()
        assert crn.is_empty()
        assert len(crn.species) == 0


class TestIsApplicable:
    def test_exact_boundary(self):
        # 2X + Y against x=2, y=1: exactly enough of each
        rxn = Reaction((2, 1), (3, 0), 1.0)
        assert is_applicable(rxn, state(2, 1))

    def test_insufficient_count(self):
        # 3Y + Z against y=2, z=5
        rxn = Reaction((3, 1, 0), (0, 0, 1), 1.0)
        assert not is_applicable(rxn, state(2, 5, 0))

    def test_dimension_mismatch_is_an_error(self):
        rxn = Reaction((3, 1, 0), (0, 0, 1), 1.0)
        with pytest.raises(CrnError):
            is_applicable(rxn, state(2, 5))

    def test_empty_reactants_always_applicable(self):
        rxn = Reaction((0, 0), (1, 0), 1.0)
        assert is_applicable(rxn, state(0, 0))
        assert is_applicable(rxn, state(7, 3))


class TestApply:
    def test_majority_step(self):
        rxn = Reaction((2, 1), (3, 0), 1.0)
        assert apply_reaction(rxn, state(2, 1)).tolist() == [3, 0]

    def test_minority_step(self):
        rxn = Reaction((1, 2), (0, 3), 1.0)
        assert apply_reaction(rxn, state(5, 5)).tolist() == [4, 6]

    def test_catalyst_count_untouched(self):
        rxn = Reaction((2, 1, 1), (3, 0, 1), 1.0)
        assert apply_reaction(rxn, state(2, 1, 7)).tolist() == [3, 0, 7]

    def test_inapplicable_application_raises(self):
        rxn = Reaction((2, 1), (3, 0), 1.0)
        with pytest.raises(CrnError):
            apply_reaction(rxn, state(1, 1))


class TestPropensity:
    def test_trimolecular_worked_value(self):
        # 3Y + Z with k=1, V=1 at y=5, z=2: 5*4*3*2
        rxn = Reaction((3, 1), (0, 2), 1.0)
        assert propensity(rxn, state(5, 2)) == 120.0

    def test_inapplicable_gives_zero(self):
        # 2X + Y at x=1: the falling factorial hits zero
        rxn = Reaction((2, 1), (3, 0), 1.0)
        assert propensity(rxn, state(1, 9)) == 0.0

    def test_catalyzed_rate_formula(self):
        # 2X + Y + A -> 3X + A at (x, y, a) = (3, 2, 10): a*x*(x-1)*y
        rxn = Reaction((2, 1, 1), (3, 0, 1), 1.0)
        assert propensity(rxn, state(3, 2, 10)) == 10 * 3 * 2 * 2

    def test_volume_scaling(self):
        rxn = Reaction((3, 1), (0, 2), 1.0)
        v = 2.0
        assert propensity(rxn, state(5, 2), v) == 120.0 / v**3

    def test_zero_arity_rate_is_k_times_volume(self):
        rxn = Reaction((0, 0), (1, 0), 2.5)
        assert propensity(rxn, state(0, 0), 3.0) == 2.5 * 3.0

    def test_rate_constant_scales_linearly(self):
        slow = Reaction((1, 0), (0, 1), 1.0)
        fast = Reaction((1, 0), (0, 1), 1e9)
        s = state(100, 0)
        assert propensity(fast, s) == 1e9 * propensity(slow, s)


class TestIsCatalyst:
    def test_catalyst_species(self):
        # X + C -> 2Y + C
        rxn = Reaction((1, 0, 1), (0, 2, 1), 1.0)
        assert is_catalyst(rxn, 2)
        assert not is_catalyst(rxn, 0)  # consumed
        assert not is_catalyst(rxn, 1)  # produced only

    def test_consumed_reactant_not_catalyst(self):
        rxn = Reaction((2, 1), (3, 0), 1.0)
        assert not is_catalyst(rxn, 1)  # r=1, p=0

    def test_index_out_of_range(self):
        rxn = Reaction((1, 0), (0, 1), 1.0)
        with pytest.raises(CrnError):
            is_catalyst(rxn, 5)


# property strategies: small random reactions and states over <= 4 species

def reactions(dim):
    vec = st.tuples(*[st.integers(0, 3)] * dim)
    return st.tuples(vec, vec, st.floats(0.001, 1e6)).filter(
        lambda t: t[0] != t[1]).map(lambda t: Reaction(t[0], t[1], t[2]))


def states(dim):
    return st.tuples(*[st.integers(0, 30)] * dim).map(lambda t: state(*t))


@given(rxn=reactions(3), s=states(3))
def test_zero_propensity_iff_inapplicable(rxn, s):
    assert (propensity(rxn, s) == 0.0) == (not is_applicable(rxn, s))


@given(rxn=reactions(3), s=states(3))
def test_apply_keeps_counts_nonnegative(rxn, s):
    if is_applicable(rxn, s):
        assert (apply_reaction(rxn, s) >= 0).all()


@given(rxn=reactions(3), s=states(3), species=st.integers(0, 2))
def test_propensity_monotone_in_reactant_counts(rxn, s, species):
    bumped = s.copy()
    bumped[species] += 1
    assert propensity(rxn, bumped) >= propensity(rxn, s)


@given(rxn=reactions(3), s=states(3))
def test_catalyst_counts_preserved(rxn, s):
    if not is_applicable(rxn, s):
        return
    out = apply_reaction(rxn, s)
    for i in range(3):
        if is_catalyst(rxn, i):
            assert out[i] == s[i]


@given(rxn=reactions(3), s=states(3))
def test_unit_volume_removes_arity_correction(rxn, s):
    # at V = 1 the propensity is the bare k times the falling factorials
    expect = rxn.rate_constant
    for i, need in enumerate(rxn.reactants):
        for m in range(need):
            expect *= float(s[i]) - m
    assert propensity(rxn, s, 1.0) == expect

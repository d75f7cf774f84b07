import pytest

from crngame import make_crn


@pytest.fixture
def majority_crn():
    """Uncatalyzed tri-molecular majority consensus over {X, Y}."""
    return make_crn([
        ({"X": 2, "Y": 1}, {"X": 3}, 1.0),
        ({"X": 1, "Y": 2}, {"Y": 3}, 1.0),
    ])


@pytest.fixture
def catalyzed_crn():
    """Catalyzed variant: A and B scale the two clock speeds."""
    return make_crn([
        ({"X": 2, "Y": 1, "A": 1}, {"X": 3, "A": 1}, 1.0),
        ({"X": 1, "Y": 2, "B": 1}, {"Y": 3, "B": 1}, 1.0),
    ])


@pytest.fixture
def shuffler_crn():
    """Catalyst shuffler: swaps A and B at a configurable speed."""
    return make_crn([
        ({"A": 1}, {"B": 1}, 5.0),
        ({"B": 1}, {"A": 1}, 5.0),
    ])

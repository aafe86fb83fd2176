import numpy as np
import pytest

from qcover import DecoherenceFunctional, HistorySpace


@pytest.fixture
def space3():
    return HistorySpace(3)


@pytest.fixture
def space4():
    return HistorySpace(4)


@pytest.fixture
def d2():
    """Two-slit functional with total destructive interference."""
    return DecoherenceFunctional(np.array([[0.5, -0.5], [-0.5, 0.5]]))


@pytest.fixture
def d3():
    """Rank-one three-slit functional built from (1, -1, 1)/sqrt(3)."""
    v = np.array([1.0, -1.0, 1.0]) / np.sqrt(3.0)
    return DecoherenceFunctional(np.outer(v, v))


@pytest.fixture
def diag4():
    """Uniform classical functional on four histories."""
    return DecoherenceFunctional(np.diag([0.25, 0.25, 0.25, 0.25]))

"""Shared fixtures for the gh_forge test suite."""

import math

import numpy as np
import pytest

from gh_forge.graph_spaces import build_E, circle_graph, circle_space, sample_graph
from gh_forge.metric_core import FiniteMetricSpace


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def two_points():
    """Factory for the space {0, a}."""

    def make(a: float) -> FiniteMetricSpace:
        return FiniteMetricSpace.from_matrix([[0.0, a], [a, 0.0]])

    return make


@pytest.fixture
def square():
    """Four points on a 4-cycle with unit edges."""
    return FiniteMetricSpace.from_matrix(
        [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], labels=["a", "b", "c", "d"]
    )


@pytest.fixture
def tripod():
    return build_E()


@pytest.fixture
def circle8():
    return circle_space(8)


@pytest.fixture
def e_net():
    return sample_graph(build_E(), math.pi / 16)


@pytest.fixture
def circle_net():
    return sample_graph(circle_graph(), math.pi / 16)

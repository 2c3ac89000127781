import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kaslocal.kas import FiniteMetricMeasureSpace


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def two_point_space():
    return FiniteMetricMeasureSpace(
        np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 1.0])
    )


def random_space(rng, n: int, dim: int = 3) -> FiniteMetricMeasureSpace:
    coords = rng.normal(size=(n, dim))
    mu = 0.5 + rng.random(n)
    return FiniteMetricMeasureSpace.from_points(coords, mu)


@pytest.fixture
def circle_space():
    ang = np.arange(12) / 12 * 2 * np.pi
    return FiniteMetricMeasureSpace.from_points(
        np.column_stack([np.cos(ang), np.sin(ang)])
    )

import math

import numpy as np
import pytest

from emdensys.exponents import SystemParams
from emdensys.radial_greens import RadialField, RadialGrid, TailModel
from emdensys.solver import bisect_ground_state, extend_state

BUBBLE = SystemParams(3, 5, 5, 0, 0)
SUBCRITICAL = SystemParams(3, 20, 2.5, 0, 0)
CRITICAL = SystemParams(3, 11, 3, 0, 0)


def bubble_profile(rho):
    return (1.0 + np.asarray(rho, dtype=float) ** 2 / 3.0) ** -0.5


def bubble_field(grid=None, power=1.0):
    """Closed-form bubble (or a power of it) sampled on a grid."""
    grid = grid or RadialGrid.log_uniform(3)
    return RadialField.from_function(
        lambda r: bubble_profile(r) ** power, grid, power, value_at_zero=1.0, nonnegative=True
    )


def capped_inverse(grid):
    """min(1, 1/rho) on R^3."""
    return RadialField.from_function(lambda r: np.minimum(1.0, 1.0 / np.asarray(r)), grid, 1.0, value_at_zero=1.0)


def unit_indicator(grid):
    vals = (grid.nodes <= 1.0).astype(float)
    return RadialField(grid, vals, 1.0, TailModel(0.0, 5.0), nonnegative=True)


def sandwich_fields(grid):
    """Monotone test fields for the weak/dual norm comparison."""
    return {
        "indicator": unit_indicator(grid),
        "capped_inverse": capped_inverse(grid),
        "bubble": bubble_field(grid),
        "bubble5": bubble_field(grid, 5.0),
        "gaussian": RadialField(grid, np.exp(-grid.nodes**2), 1.0, TailModel(0.0, 8.0)),
        "steep": RadialField.from_function(lambda r: (1 + r) ** -3.5, grid, 3.5, value_at_zero=1.0),
    }


@pytest.fixture(scope="session")
def grid3():
    return RadialGrid.log_uniform(3)


@pytest.fixture(scope="session")
def bubble_state():
    return bisect_ground_state(BUBBLE)


@pytest.fixture(scope="session")
def subcritical_state():
    return bisect_ground_state(SUBCRITICAL)


@pytest.fixture(scope="session")
def critical_state():
    return bisect_ground_state(CRITICAL)


@pytest.fixture(scope="session")
def subcritical_extended(subcritical_state):
    return extend_state(subcritical_state)


@pytest.fixture(scope="session")
def critical_extended(critical_state):
    return extend_state(critical_state)


SQRT3 = math.sqrt(3.0)
BALL3 = 4.0 * math.pi / 3.0

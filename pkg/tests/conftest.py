"""
Shared fixtures: the reference data summaries and prior settings used across
the test phases.
"""
import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from src.core_model import Hyperparameters, build_dataset, dataset_from_summaries


FIVE_GROUP_YBAR = [-0.80247, -1.0014, -0.69090, -1.1413, -1.0125]
FIVE_GROUP_GRAND = -0.92973
THREE_GROUP_YBAR = [-0.54816, 0.92516, -0.19924]
THREE_GROUP_GRAND = 0.059253


@pytest.fixture
def five_groups():
    """Five groups of ten observations, summaries rounded to five digits."""
    return dataset_from_summaries([10] * 5, FIVE_GROUP_YBAR, 32.990, FIVE_GROUP_GRAND)


@pytest.fixture
def three_groups():
    """Three groups of four observations."""
    return dataset_from_summaries([4] * 3, THREE_GROUP_YBAR, 20.285, THREE_GROUP_GRAND)


@pytest.fixture
def toy():
    """Three groups of two: means (2, 3, 1), SSE 6, grand mean 2."""
    return build_dataset([[1, 3], [2, 4], [0, 2]])


@pytest.fixture
def unbalanced():
    return dataset_from_summaries([2, 3, 5], [0.1, -0.4, 0.9], 3.0)


@pytest.fixture
def settings():
    """The four prior settings for the five-group data, keyed 1..4."""
    def make(a1, b1, a2, b2, m0):
        return Hyperparameters(a1=a1, b1=b1, a2=a2, b2=b2, m0=m0, s0=1.0)

    return {
        1: make(2.5, 1.0, 1.0, 1.0, 0.0),
        2: make(2.5, 1.0, 1.0, 1.0, FIVE_GROUP_GRAND),
        3: make(0.1, 0.1, 0.1, 0.1, FIVE_GROUP_GRAND),
        4: make(0.01, 0.01, 0.01, 0.01, FIVE_GROUP_GRAND),
    }


@pytest.fixture
def informative():
    """Informative prior used with the three-group data."""
    return Hyperparameters(a1=5.0, b1=20.0, a2=2.0, b2=20.0, m0=0.0, s0=4.0)


@pytest.fixture
def five_group_config():
    """Run configuration dict: five-group summaries, setting 2, fixed parameters."""
    return {
        "data": {
            "summaries": {
                "m": [10] * 5,
                "ybar": FIVE_GROUP_YBAR,
                "sse": 32.990,
                "ybar_grand": FIVE_GROUP_GRAND,
            }
        },
        "hyperparameters": {"a1": 2.5, "b1": 1.0, "a2": 1.0, "b2": 1.0, "m0": "ybar"},
        "fixed": {"gamma": 0.2596, "phi": 0.5385, "d": 3.0079, "r": 0.0789},
    }

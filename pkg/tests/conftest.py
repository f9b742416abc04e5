import os
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from ahg.linalg import two_way_configuration, two_way_margins

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

MODELS = Path(__file__).resolve().parent.parent / "models"


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False, help="run minute-scale checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: minute-scale check, enabled with --long")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip = pytest.mark.skip(reason="needs --long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def models_dir():
    return MODELS


@pytest.fixture(scope="session")
def small_A():
    return [[1, 1, 1], [0, 1, 2]]


@pytest.fixture(scope="session")
def table2x2():
    A = two_way_configuration(2, 2)
    return A, two_way_margins((36, 12), (37, 11))


@pytest.fixture(scope="session")
def ex65():
    """The 2 x 4 instance with rows (4, 19) and columns (9, 5, 3, 6)."""
    A = two_way_configuration(2, 4)
    beta = two_way_margins((4, 19), (9, 5, 3, 6))
    p = [1, Fraction(1, 3), Fraction(1, 2), Fraction(1, 5001), 1, 1, 1, 1]
    return A, beta, p


@pytest.fixture(scope="session")
def ex4():
    A = [[0, 0, 0, 1, 1, 1, 1], [1, 0, 0, 1, 0, 1, 0], [0, 1, 1, 0, 1, 0, 1], [1, 1, 0, 1, 1, 0, 0]]
    return A, (19, 132, 9, 11, 52, 6, 97)

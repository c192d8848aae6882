import warnings

import pytest

from evacgate.scenario import Scenario

warnings.filterwarnings("ignore", message=".*roundoff error.*")


@pytest.fixture(scope="session")
def amager():
    """Shared default scenario; distribution/risk-field builds are cached."""
    return Scenario.default()


@pytest.fixture(scope="session")
def amager_zone(amager):
    return amager.build_zone()


@pytest.fixture(scope="session")
def disk_dist(amager):
    return amager.build_distribution(1.0)

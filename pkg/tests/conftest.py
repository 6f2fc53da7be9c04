import os

import pytest
from hypothesis import settings

from flapplan.dynamics import load_vehicle

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def vehicle():
    return load_vehicle()


@pytest.fixture(scope="session")
def params(vehicle):
    return vehicle.params


@pytest.fixture(scope="session")
def scales(vehicle):
    return vehicle.scales

"""
Shared pytest configuration: hypothesis profiles and the opt-in slow marker.
Run the desk-scale checks with `pytest --runslow`; pick a profile with HYPOTHESIS_PROFILE.
"""

import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run desk-scale checks at g = 6 and g = 8")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale check, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _clean_pencils_env(monkeypatch):
    for name in list(os.environ):
        if name.startswith("PENCILS_"):
            monkeypatch.delenv(name, raising=False)

"""Shared pytest setup: project root on sys.path, hypothesis profiles, common fixtures."""

import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
sys.path.insert(0, str(ROOT))

try:
    from hypothesis import HealthCheck, settings

    settings.register_profile("fast", max_examples=25, deadline=None,
                              suppress_health_check=[HealthCheck.too_slow])
    settings.register_profile("thorough", max_examples=200, deadline=None)
    settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))
except ImportError:
    pass


@pytest.fixture
def problems_dir() -> Path:
    return ROOT / "data" / "problems"


@pytest.fixture(autouse=True)
def no_user_config(monkeypatch):
    """Keep a developer's HOLDERREG_CONFIG out of the tests."""
    monkeypatch.delenv("HOLDERREG_CONFIG", raising=False)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs a whole property suite")

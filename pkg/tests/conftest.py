"""Shared fixtures for the playfv test suite."""

import pytest

from playfv.flux import get_flux


@pytest.fixture
def burgers():
    """f(u) = u^2 / 2."""
    return get_flux("burgers")


@pytest.fixture
def temp_home(tmp_path, monkeypatch):
    """Set up isolated home directory for tests."""
    (tmp_path / ".playfv").mkdir()
    monkeypatch.setenv("HOME", str(tmp_path))
    for var in ("PLAYFV_OUTPUT_DIR", "PLAYFV_LOG_LEVEL", "PLAYFV_ENTROPY_GRID"):
        monkeypatch.delenv(var, raising=False)
    return tmp_path

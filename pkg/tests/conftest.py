"""Shared fixtures and helpers for the test suite."""
import numpy as np
import pytest

from rislink.validation import ks_distance, table1_direct, table1_reflected, table1_system

__all__ = ["ks_distance", "table1_direct", "table1_reflected", "table1_system"]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

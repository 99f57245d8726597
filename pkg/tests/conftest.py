"""
Pytest configuration and fixtures for deltawell tests
"""
import os
import sys

import pytest
from click.testing import CliRunner

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from deltawell.eigenbasis import PotentialConfig  # noqa: E402
from deltawell.propagator import WaveField  # noqa: E402
from deltawell.spectral import gaussian, square_pulse  # noqa: E402


@pytest.fixture
def reference_config():
    """Well of length 3 with barrier strength 1"""
    return PotentialConfig(L=3.0, V0=1.0)


@pytest.fixture
def gaussian_sf():
    """Gaussian spectral function with K = 1/2"""
    return gaussian(0.5)


@pytest.fixture
def square_sf(reference_config):
    """Square-pulse spectral function matching the well"""
    return square_pulse(reference_config.L)


@pytest.fixture
def gaussian_field(reference_config, gaussian_sf):
    """Closed-form wave field for the gaussian spectrum"""
    return WaveField.build(reference_config, gaussian_sf)


@pytest.fixture
def square_field(reference_config, square_sf):
    """Closed-form wave field for the square pulse"""
    return WaveField.build(reference_config, square_sf)


@pytest.fixture
def runner(monkeypatch, tmp_path):
    """CLI runner isolated from the caller's environment"""
    monkeypatch.delenv('DELTAWELL_CONFIG', raising=False)
    monkeypatch.delenv('DELTAWELL_LOG_LEVEL', raising=False)
    monkeypatch.chdir(tmp_path)
    return CliRunner()

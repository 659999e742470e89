"""Shared fixtures: small desk-scale grids sized for fast tests."""

from __future__ import annotations

import numpy as np
import pytest

from nfholo import ApertureGrid, FrequencyGrid, volume_for_aperture


@pytest.fixture
def aperture16():
    return ApertureGrid(16, 16, 3e-3, 3e-3, 0.0)


@pytest.fixture
def freqs8():
    return FrequencyGrid(72e9, 76e9, 8)


@pytest.fixture
def volume8(aperture16):
    return volume_for_aperture(aperture16, 8, 16, 16, 0.3, 0.44)


@pytest.fixture
def tiny_grids():
    """Aperture/frequency/volume small enough for the dense matrix oracle."""
    aperture = ApertureGrid(8, 8, 3e-3, 3e-3, 0.0)
    freqs = FrequencyGrid(72e9, 76e9, 4)
    volume = volume_for_aperture(aperture, 4, 8, 8, 0.3, 0.36)
    return aperture, freqs, volume


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_cube(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

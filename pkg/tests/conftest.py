import logging

import numpy as np
import pytest

from plumefilters.cube_io import HyperCube, TargetSpectrum

# Jitter warnings are expected on degenerate scopes; keep test output clean.
logging.getLogger("plumefilters").setLevel(logging.ERROR)


def random_cube(rng: np.random.Generator, height=16, width=16, bands=8, offset=30.0, spread=4.0):
    """A positive-mean random cube (all filter scopes well conditioned)."""
    wavelengths = np.linspace(2100.0, 2500.0, bands)
    base = offset + spread * rng.standard_normal(bands)
    data = base[None, None, :] + rng.standard_normal((height, width, bands))
    return HyperCube(data=data.astype(np.float32), wavelengths=wavelengths)


def random_spectrum(rng: np.random.Generator, bands=8):
    wavelengths = np.linspace(2100.0, 2500.0, bands)
    values = -rng.uniform(0.05, 1.0, bands)
    return TargetSpectrum(wavelengths=wavelengths, values=values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

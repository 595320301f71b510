"""
Pytest configuration and shared fixtures.
"""
from typing import Callable

import numpy as np
import pytest

from src.link_model.schemas import LinkGeometry


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for reproducible random inputs."""
    return np.random.default_rng(42)


@pytest.fixture
def evaluation_geometry() -> LinkGeometry:
    """N=8 link at the evaluation settings with a pi/6 off-axis displacement."""
    return LinkGeometry.square(8, phi=np.pi / 6)


@pytest.fixture
def aligned_geometry() -> LinkGeometry:
    """N=8 coaxial, parallel link."""
    return LinkGeometry.square(8)


@pytest.fixture
def random_geometry(rng: np.random.Generator) -> Callable[..., LinkGeometry]:
    """Factory for random misaligned square geometries."""
    def make(n_elements: int = None, **overrides) -> LinkGeometry:
        wavelength = 0.01
        params = {
            "n_tx": n_elements or int(rng.choice([2, 4, 8, 16])),
            "radius_tx": rng.uniform(2.0, 6.0) * wavelength,
            "radius_rx": rng.uniform(2.0, 6.0) * wavelength,
            "distance": rng.uniform(0.1, 10.0),
            "theta": rng.uniform(0.0, 2 * np.pi),
            "phi": rng.uniform(0.0, np.pi / 3),
            "tilt_x": rng.uniform(-np.pi / 3, np.pi / 3),
            "tilt_y": rng.uniform(-np.pi / 3, np.pi / 3),
            "alpha_tx": rng.uniform(0.0, 2 * np.pi),
            "alpha_rx": rng.uniform(0.0, 2 * np.pi),
            "wavelength": wavelength,
        }
        params["n_rx"] = params["n_tx"]
        params.update(overrides)
        return LinkGeometry(**params)

    return make

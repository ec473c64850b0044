import numpy as np
import pytest

from blaschke import default_probe_grid


@pytest.fixture
def probes():
    return default_probe_grid()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_disk(rng, r_max=0.85):
    r = r_max * np.sqrt(rng.uniform())
    phi = rng.uniform(0, 2 * np.pi)
    return complex(r * np.cos(phi), r * np.sin(phi))

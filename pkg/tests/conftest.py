import numpy as np
import pytest

from scspovm.spin import build_spin_system


@pytest.fixture(scope="session")
def sys4():
    return build_spin_system(4)


@pytest.fixture(scope="session")
def sys1():
    return build_spin_system(1)


def random_direction(rng):
    z = rng.uniform(-1, 1)
    phi = rng.uniform(0, 2 * np.pi)
    s = np.sqrt(1 - z * z)
    return np.array([s * np.cos(phi), s * np.sin(phi), z])

import cmath

import numpy as np
import pytest

from levitube.fuchsian import octagon_group
from levitube.moebius import DiskMoebius


@pytest.fixture(scope="session")
def group():
    return octagon_group()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_moebius(rng, radius=0.8) -> DiskMoebius:
    """Rotation followed by the transvection taking 0 to a random point."""
    c = radius * np.sqrt(rng.random()) * cmath.exp(2j * np.pi * rng.random())
    rot = DiskMoebius(cmath.exp(1j * np.pi * rng.random()), 0)
    return DiskMoebius.moving_origin_to(complex(c)).compose(rot)


def random_disk(rng, n, radius=0.9):
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))

import numpy as np
import pytest

from freeconv.acceptance import ARCSINE, BERNOULLI, DELTA1, JAC_A, JAC_B, MP, UNIFORM
from freeconv.measures import point_mass


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def measures():
    return {
        "A": JAC_A,
        "B": JAC_B,
        "uniform": UNIFORM,
        "arcsine": ARCSINE,
        "mp": MP,
        "bernoulli": BERNOULLI,
        "delta1": DELTA1,
        "delta2": point_mass(2.0),
    }


def upper_points(rng, n, x=(-2.0, 10.0), logy=(-2.0, 1.0)):
    xs = rng.uniform(*x, n)
    ys = 10 ** rng.uniform(*logy, n)
    return xs + 1j * ys

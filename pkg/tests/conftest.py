import numpy as np
import pytest

from pinkforge.modforms import delta_expansion, series_pow
from pinkforge.pinklie import example8


@pytest.fixture(scope="session")
def delta2_2m():
    """Delta mod 2 to degree 2e6, shared by the density criteria."""
    return delta_expansion(2, 2_000_000)


@pytest.fixture(scope="session")
def delta_powers_2m(delta2_2m):
    return {
        3: series_pow(delta2_2m, 3),
        9: series_pow(delta2_2m, 9),
        11: series_pow(delta2_2m, 11),
    }


@pytest.fixture(scope="session")
def example_family():
    """The two-generator example at p = 3 for k = 2..6."""
    return {k: example8(3, k) for k in (2, 3, 4, 5, 6)}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)

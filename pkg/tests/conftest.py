import numpy as np
import pytest

from singtrace.conetrace import ConeProblem, ConeTraceEngine
from singtrace.spectra import circle_scalar_spectrum


@pytest.fixture(scope="session")
def circle07():
    return circle_scalar_spectrum(0.7, 120)


@pytest.fixture(scope="session")
def cone07(circle07):
    return ConeProblem(circle07, m=2)


@pytest.fixture(scope="session")
def engine07(cone07):
    return ConeTraceEngine(cone07)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from supercurves.target import FlatTorus, PerturbedR4, RoundSphereChart
from supercurves.worldsheet import ConformalFactor, TorusGrid, Worldsheet

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def perturbed():
    return PerturbedR4(0.1)


@pytest.fixture(scope="session")
def sphere():
    return RoundSphereChart()


def sheet(n=32, scheme="spectral", lam=ConformalFactor(), P=(1.0, 1.0)):
    return Worldsheet(TorusGrid(n, n, P[0], P[1], scheme), lam)


ALL_TARGETS = [FlatTorus(2), FlatTorus(4), RoundSphereChart(), PerturbedR4(0.1)]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

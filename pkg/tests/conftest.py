import math

import pytest
from verdicts import ACCEPTANCE_LINES

from osmaxwell.model import HarmonicRegime, MediumParameters, TimeDiscreteRegime


@pytest.fixture(scope="session")
def medium():
    return MediumParameters()


@pytest.fixture(scope="session")
def harmonic(medium):
    return HarmonicRegime.from_omega_tilde(2 * math.pi, medium)


@pytest.fixture(scope="session")
def time_discrete(medium):
    return TimeDiscreteRegime.from_eta_tilde(1.0, medium)


@pytest.fixture(scope="session", params=["harmonic", "time-discrete"])
def regime(request, harmonic, time_discrete):
    return harmonic if request.param == "harmonic" else time_discrete



def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])

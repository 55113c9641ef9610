import math

import pytest

from pml.estimator import CandidateFamily
from pml.measures1d import Exponential, Gaussian


def phi(x: float) -> float:
    """Standard normal CDF via math.erf, independent of the library's own CDF."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


@pytest.fixture(scope="session")
def three_family():
    return CandidateFamily(
        [("N01", Gaussian(0.0, 1.0)), ("N11", Gaussian(1.0, 1.0)), ("E1", Exponential(1.0))],
        sink_id="F0",
    )


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

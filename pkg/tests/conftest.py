import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bellscope.correlation import CorrelationTable, ExperimentShape

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def singlet_table(alice_angles, bob_angles):
    """Singlet statistics for spin measurements in the x-z plane.

    P(a, b | x, y) = (1 - a b cos(theta_x - theta_y)) / 4 with a, b = +-1.
    """
    probs = np.zeros((2, 2, 2, 2))
    signs = (1, -1)
    for x, ta in enumerate(alice_angles):
        for y, tb in enumerate(bob_angles):
            for i, a in enumerate(signs):
                for j, b in enumerate(signs):
                    probs[x, y, i, j] = (1 - a * b * np.cos(ta - tb)) / 4
    return CorrelationTable(ExperimentShape(2, 2, 2), probs)


CHSH_ALICE = (0.0, np.pi / 2)
CHSH_BOB = (np.pi / 4, -np.pi / 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one line per acceptance criterion for the terminal summary."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])

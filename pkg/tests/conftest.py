import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quotspec import harness
from quotspec.tuples import validate_tuple

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_commuting(seed, d, n):
    """Commuting tuple ``T_i = p_i(A)`` for one random ``A`` and random quadratics ``p_i``."""
    rng = np.random.default_rng(seed)
    A = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    mats = []
    for _ in range(d):
        c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        mats.append(c[0] * np.eye(n) + c[1] * A + 0.5 * c[2] * A @ A)
    return validate_tuple(mats, comm_tol=1e-9)


@pytest.fixture(scope="session")
def fix_a():
    return harness.Model.from_spec(harness.fix_a(), "fix_a")


@pytest.fixture(scope="session")
def fix_b():
    return harness.Model.from_spec(harness.fix_b(), "fix_b")


# Acceptance tests fill this with one line per criterion.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gapcert.lti import StateSpace

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: dict = {}


def random_stable(rng, n, m, p, margin=0.2, feedthrough=True):
    A = rng.standard_normal((n, n))
    shift = np.linalg.eigvals(A).real.max() + margin + rng.random()
    A = A - shift * np.eye(n)
    D = rng.standard_normal((p, m)) if feedthrough and rng.random() < 0.5 else np.zeros((p, m))
    return StateSpace(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)), D)


def random_plant(rng, n, m, p):
    """Random plant, possibly unstable."""
    A = rng.standard_normal((n, n))
    D = rng.standard_normal((p, m)) if rng.random() < 0.5 else np.zeros((p, m))
    return StateSpace(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)), D)


@st.composite
def stable_systems(draw, max_n=4, max_io=2, shape=None):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(1, max_n))
    if shape is None:
        m, p = draw(st.integers(1, max_io)), draw(st.integers(1, max_io))
    else:
        p, m = shape
    return random_stable(rng, n, m, p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])

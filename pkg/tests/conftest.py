import numpy as np
import pytest

from omegaopt.market import excess_model, synthetic_moments
from omegaopt.numerics import RngStream

ACCEPTANCE_LINES: list[str] = []


def random_model(n, seed, benchmark=0.0, stream=0, positive=True):
    """Synthetic benchmark-style instance; redrawn until some excess is positive."""
    rng = RngStream(seed, stream)
    while True:
        model = excess_model(synthetic_moments(n, rng), benchmark)
        if model.has_positive_excess or not positive:
            return model


def random_pd(n, rng: np.random.Generator):
    A = rng.standard_normal((n, n))
    return A @ A.T / n + 0.05 * np.eye(n)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import settings

from trollirl.mdp import Action, State

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Filled by tests/test_acceptance.py, printed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_transitions(rng, n=None):
    """Row-stochastic 3x4x3 array(s) with strictly positive entries."""
    shape = (3, 4, 3) if n is None else (n, 3, 4, 3)
    p = rng.random(shape) + 0.05
    return p / p.sum(axis=-1, keepdims=True)


def random_steps(rng, length):
    return [(State(int(s)), Action(int(a)))
            for s, a in zip(rng.integers(0, 3, length), rng.integers(0, 4, length))]

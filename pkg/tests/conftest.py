import random

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("lptv", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("lptv")


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)

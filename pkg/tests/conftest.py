import numpy as np
import pytest
from hypothesis import settings

from conicfinsler.finsler import FinslerNorm

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

STRUCTURES = [(0.0, 0.0), (0.2, 0.0), (0.3, 0.1), (0.6, 0.4)]


@pytest.fixture(scope="session")
def round_norm():
    return FinslerNorm.from_pq(0.0, 0.0)


@pytest.fixture(scope="session")
def norm_31():
    return FinslerNorm.from_pq(0.3, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number: int, title: str, passed: bool, detail: str):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number:2d}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)

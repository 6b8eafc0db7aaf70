import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hawkesnet.reference import five_node_model, two_node_model, univariate_model

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_configure(config):
    warnings.filterwarnings("ignore", message="trace profile: dropped")


@pytest.fixture
def five():
    return five_node_model()


@pytest.fixture
def two_node():
    return two_node_model()


@pytest.fixture
def uni():
    return univariate_model()


def batch_se(values):
    """Standard error of the mean of per-batch statistics (first axis)."""
    values = np.asarray(values)
    return values.std(axis=0, ddof=1) / np.sqrt(values.shape[0])


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records and prints one PASS/FAIL line, then asserts ``ok``."""
    def record(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)

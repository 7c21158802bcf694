import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tdho import so21

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def apex():
    return so21.vec(0.0, 0.0, 1.0)


@pytest.fixture
def squeezed():
    return so21.vec(math.sinh(1.0), 0.0, math.cosh(1.0))


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b))))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)

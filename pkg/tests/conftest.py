import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cohsmooth import DensityMatrix

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def plus():
    return DensityMatrix.from_pure(np.array([1.0, 1.0]) / np.sqrt(2.0))


def ket_density(*amps):
    a = np.asarray(amps, dtype=complex)
    a = a / np.linalg.norm(a)
    return DensityMatrix.from_pure(a)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

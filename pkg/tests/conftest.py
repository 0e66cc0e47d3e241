import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "wlab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("wlab")


@pytest.fixture(scope="session")
def unduloid():
    """One period of the a=1, b=1 family with neck radius 0.5."""
    from wlab import Linear, delaunay_family

    return delaunay_family(Linear(1.0, 1.0), 0.5)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

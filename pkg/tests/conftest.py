import pytest
from hypothesis import HealthCheck, settings

import polyatree as pt

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def constants():
    return pt.compute_constants()


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(f"CRITERION {num:2d} {'PASS' if ok else 'FAIL'} - {detail}")

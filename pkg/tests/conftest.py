import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): an acceptance criterion")
    config.stash[_CRITERIA] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    store = item.config.stash[_CRITERIA]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        store[num] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash[_CRITERIA]
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(store):
        title, outcome, duration = store[num]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict}  {title}  ({duration:.1f} s)")


@pytest.fixture
def rng():
    return random.Random(20240611)

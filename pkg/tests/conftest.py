import pytest
from hypothesis import HealthCheck, settings

from pmod.group import create_context
from pmod.rng import SeededRandomSource

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def tctx():
    return create_context("transparent")


@pytest.fixture
def bigctx():
    """Transparent backend over a large prime: exponents stay visible but
    accidental collisions are gone."""
    return create_context("transparent", p=2**61 - 1)


@pytest.fixture(scope="session")
def ss512():
    return create_context("ss512")


@pytest.fixture
def rng():
    return lambda seed: SeededRandomSource(seed)


# --------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion in the summary

def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(label): ties a test to an acceptance criterion"
    )
    config.addinivalue_line("markers", "slow: long-running timing benchmarks")


_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "call":
        _criteria[label] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.skipped:
        _criteria[label] = "SKIP"
    elif report.when == "setup" and report.failed:
        _criteria[label] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    def key(label):
        head = label.split(":", 1)[0]
        return (int(head) if head.isdigit() else 99, label)
    for label in sorted(_criteria, key=key):
        terminalreporter.write_line("[%s] criterion %s" % (_criteria[label], label))

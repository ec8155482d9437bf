import pytest

from latlift.io import Fixtures


@pytest.fixture(scope="session")
def fx():
    return Fixtures()


@pytest.fixture(scope="session")
def V1(fx):
    return fx.variety("V1")


@pytest.fixture(scope="session")
def V2(fx):
    return fx.variety("V2")


# one pass/fail line per acceptance criterion, printed after the run

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.name
    if item.module.__name__.endswith("test_acceptance") and name.startswith("test_criterion_"):
        if rep.when == "call" or (rep.when == "setup" and rep.failed):
            number = int(name.split("_")[2])
            title = (item.function.__doc__ or "").strip().splitlines()[0]
            _CRITERIA[number] = (rep.passed, title, getattr(item, "_detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, title, detail = _CRITERIA[number]
        tag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{tag}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))

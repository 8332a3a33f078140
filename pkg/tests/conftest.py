import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(code, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    code, title = marker
    prev = _RESULTS.get(code, (title, "PASS"))
    failed = report.failed or (report.when == "call" and report.skipped)
    _RESULTS[code] = (title, "FAIL" if failed or prev[1] == "FAIL" else "PASS")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        outcome.get_result().acceptance = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for code in sorted(_RESULTS, key=lambda c: int(c[2:])):
        title, status = _RESULTS[code]
        terminalreporter.write_line(f"{status} {code} {title}")

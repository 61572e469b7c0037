import pytest

_OUTCOMES: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.failed):
        number, title = marker.args
        # a criterion split over parametrized items fails if any item fails
        previous = _OUTCOMES.get(number, ("PASS", title))[0]
        status = "PASS" if report.passed and previous == "PASS" else "FAIL"
        _OUTCOMES[number] = (status, title)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        status, title = _OUTCOMES[number]
        terminalreporter.write_line(f"{status} criterion {number:>2}: {title}")

import pytest
from hypothesis import settings

# one slow CPU: no per-example deadline; fixed example streams so reruns match
settings.register_profile("repo", deadline=None, derandomize=True)
settings.load_profile("repo")

# criterion number -> (title, passed, detail) for tests marked @pytest.mark.acceptance(number, title)
_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _ACCEPTANCE[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        line = f"{'PASS' if ok else 'FAIL'} AC{number:<2} {title}"
        tr.write_line(f"{line}: {detail}" if detail else line)

import pytest

from rramc.technology import default_profile


@pytest.fixture(scope="session")
def profile():
    return default_profile()


@pytest.fixture(scope="session")
def ideal_profile(profile):
    """Parasitics shrunk until every settling time is negligible."""
    return profile.replace(
        r_line_per_cell=1e-6,
        c_line_per_cell=1e-24,
        r_mux_on=1e-3,
        r_driver=1e-3,
        r_on_access=1e-3,
        r_sense_in=1e-3,
    )


# --- acceptance criteria summary ---------------------------------------------

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): test that decides acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.args
    ok = rep.passed if rep.when == "call" else not rep.failed
    prev = _acceptance.get(n, (True, title))
    _acceptance[n] = (prev[0] and ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        ok, title = _acceptance[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")

import os
from pathlib import Path

import pytest

UNSW_FILES = ("UNSW_NB15_training-set.csv", "UNSW_NB15_testing-set.csv")

_RESULTS = {}  # criterion number -> list of (status, test name)
_DESCRIPTIONS = {}


def unsw_paths():
    """(train, test) CSV paths when the published UNSW-NB15 split is available, else None.

    Looked up in $UNSW_NB15_DIR, then <repo>/data, then ~/data/unsw-nb15.
    """
    roots = [os.environ.get("UNSW_NB15_DIR"), Path(__file__).resolve().parents[1] / "data",
             Path.home() / "data" / "unsw-nb15"]
    for root in roots:
        if not root:
            continue
        paths = [Path(root) / name for name in UNSW_FILES]
        if all(p.is_file() for p in paths):
            return paths
    return None


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, description): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, description = marker.args
    _DESCRIPTIONS[number] = description
    if rep.when == "call" or (rep.when == "setup" and rep.skipped) or (rep.failed and rep.when != "call"):
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        _RESULTS.setdefault(number, []).append((status, item.name))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        statuses = [s for s, _ in _RESULTS[number]]
        if "FAIL" in statuses:
            status = "FAIL"
        elif all(s == "SKIP" for s in statuses):
            status = "SKIP"
        else:
            status = "PASS"
        note = " (UNSW-NB15 CSVs not found; set UNSW_NB15_DIR)" if status == "SKIP" else ""
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {_DESCRIPTIONS[number]}{note}")

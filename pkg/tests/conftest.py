import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_TIMES: dict[str, float] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one pass/fail line per acceptance criterion as it finishes."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "setup":
        _ACCEPTANCE_TIMES[item.nodeid] = time.perf_counter()
    if report.when != "call" or "test_acceptance" not in item.nodeid:
        return
    elapsed = time.perf_counter() - _ACCEPTANCE_TIMES.get(item.nodeid, time.perf_counter())
    status = "PASS" if report.passed else "FAIL"
    name = item.nodeid.split("::")[-1]
    line = f"[acceptance] {status}  {name}  ({elapsed:.1f}s)"
    capman = item.config.pluginmanager.getplugin("capturemanager")
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)

import os
import sys
import time
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SUITE_BUDGET = 600.0  # seconds for the whole suite
VERDICTS: list[str] = []
_START = time.perf_counter()


def record_verdict(line: str) -> None:
    VERDICTS.append(line)


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _START
    ok = elapsed < SUITE_BUDGET
    record_verdict(f"{'PASS' if ok else 'FAIL'} suite_runtime: {elapsed:.1f} s (budget {SUITE_BUDGET:.0f} s)")
    if not ok and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)

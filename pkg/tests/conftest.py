from __future__ import annotations

import time

import pytest

from macrocell.binfmt import serialize
from macrocell.compiler import build
from macrocell.container import Container, ContainerConfig, NonVolatileMemory
from macrocell.harness import rack_manager_source
from macrocell.perfdata import PlatformType, uniform_perf_data

PLATFORM_A = PlatformType("CPU-A", "1", "RTOS", "3", "1.0")
PLATFORM_B = PlatformType("CPU-A", "1", "RTOS", "3", "2.0")
PLATFORM_C = PlatformType("CPU-B", "2", "RTOS", "3", "1.0")


@pytest.fixture
def rack_source() -> str:
    return rack_manager_source()


@pytest.fixture
def perf_a():
    return uniform_perf_data(PLATFORM_A, cost=1, overhead=50)


@pytest.fixture
def rack_build(rack_source, perf_a):
    return build(rack_source, [perf_a])


@pytest.fixture
def rack_container(rack_build, perf_a):
    """A container on platform A with the rack manager file data-loaded as 'rack'."""
    nvm = NonVolatileMemory()
    nvm.store("rack", serialize(rack_build.compiled))
    return Container(ContainerConfig(perf_a, 4096, 8), nvm)


# --- acceptance report -----------------------------------------------------

SUITE_LIMIT_S = 120.0
_criteria: dict[int, tuple[str, str]] = {}
_session = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    failed = call.excinfo is not None
    title, previous = _criteria.get(n, (title, "PASS"))
    _criteria[n] = (title, "FAIL" if failed or previous == "FAIL" else "PASS")


def _suite_criterion(session) -> None:
    # whole-suite wall time can only be judged here, once every test has run
    if not _criteria or "start" not in _session or 10 in _criteria:
        return
    elapsed = time.perf_counter() - _session["start"]
    ok = elapsed < SUITE_LIMIT_S and session.testsfailed == 0
    _criteria[10] = (f"Whole suite in {elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s)", "PASS" if ok else "FAIL")
    if elapsed >= SUITE_LIMIT_S:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_sessionfinish(session, exitstatus):
    _suite_criterion(session)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, verdict = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d} {verdict}  {title}")

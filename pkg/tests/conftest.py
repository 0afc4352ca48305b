import numpy as np
import pytest

from hybrid_al.pool import Pool

_acceptance_lines: list[str] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.get_closest_marker("acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if report.passed else "FAIL"
        _acceptance_lines.append(f"[{status}] {doc} ({report.duration:.1f}s)")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_pool(n=10, d=2, C=3, seed=0, labeled=()):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d))
    y = np.arange(n) % C
    pool = Pool.from_arrays(X, y, C)
    if labeled:
        from hybrid_al.pool import move_to_labeled
        pool = move_to_labeled(pool, list(labeled))
    return pool

import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", default=False,
                     help="run opt-in long simulations (24-qubit instances)")


def long_enabled(config) -> bool:
    return config.getoption("--run-long") or os.environ.get("TRAVELGRAPH_LONG") == "1"


@pytest.fixture
def criterion():
    """Context manager that records PASS/FAIL for an acceptance criterion."""

    @contextmanager
    def run(number: int, title: str, budget_s: float | None = None):
        info: dict = {}
        t0 = time.perf_counter()
        try:
            yield info
            elapsed = time.perf_counter() - t0
            if budget_s is not None:
                assert elapsed < budget_s, f"took {elapsed:.1f}s, budget {budget_s}s"
        except BaseException as exc:
            if isinstance(exc, pytest.skip.Exception):
                _RESULTS[number] = ("SKIP", title, str(exc))
            else:
                _RESULTS[number] = ("FAIL", title, f"{info.get('detail', '')} {exc}".strip())
            raise
        _RESULTS[number] = ("PASS", title,
                            f"{info.get('detail', '')} ({time.perf_counter() - t0:.2f}s)".strip())

    return run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, title, detail = _RESULTS[n]
        terminalreporter.write_line(f"{status} criterion {n}: {title} :: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

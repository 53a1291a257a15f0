import importlib

import pytest

from ssacc._kernels import BACKEND


def _backends():
    mods = [("python", "ssacc._pykernels")]
    try:
        importlib.import_module("ssacc._ckernels")
        mods.append(("cython", "ssacc._ckernels"))
    except ImportError:
        pass
    return mods


@pytest.fixture(params=_backends(), ids=lambda b: b[0])
def kernels(request):
    """Each available kernel backend in turn."""
    return importlib.import_module(request.param[1])


def pytest_report_header(config):
    return f"ssacc kernel backend: {BACKEND}"


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then fail the test if the check did not hold."""
    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE, key=lambda x: x[0]):
            terminalreporter.write_line(line)

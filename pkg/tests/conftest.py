from __future__ import annotations

import numpy as np
import pytest

from vbpbb import _kernels

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion, title): exit criterion, reported in the summary")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when not in ("setup", "call"):
        return
    crit, title = marker.args
    if call.excinfo is not None:
        _ACCEPTANCE[crit] = ("FAIL", title)
    elif call.when == "call" and _ACCEPTANCE.get(crit, ("PASS",))[0] != "FAIL":
        _ACCEPTANCE[crit] = ("PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: (len(c), c)):
        status, title = _ACCEPTANCE[crit]
        terminalreporter.write_line(f"criterion {crit}: {status}  {title}")


@pytest.fixture(params=["numpy", "numba"])
def kernels(request):
    """(window_sum, block_means, phase_means) for one backend."""
    name = request.param
    if name == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    return (
        getattr(_kernels, f"window_sum_{name}"),
        getattr(_kernels, f"block_means_{name}"),
        getattr(_kernels, f"phase_means_{name}"),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)

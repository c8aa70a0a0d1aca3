from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from srsim import _pykernels, engine, isa  # noqa: E402

try:
    from srsim import _speedups
except ImportError:  # extension not built
    _speedups = None

PROGRAMS = Path(__file__).with_name("programs")

_BACKENDS = {"python": _pykernels}
if _speedups is not None:
    _BACKENDS["cython"] = _speedups


@pytest.fixture(params=["cython", "python"])
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    mod = _BACKENDS.get(request.param)
    if mod is None:
        pytest.skip("compiled extension not built")
    monkeypatch.setattr(engine, "last_containing", mod.last_containing)
    monkeypatch.setattr(isa, "decode_fields", mod.decode_fields)
    return request.param


# -- acceptance reporting ---------------------------------------------------

_acceptance: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    num, title = mark.args
    slot = _acceptance.setdefault(num, [title, True, False])
    if rep.when == "call":
        slot[2] = True
    if rep.failed or (rep.when == "setup" and rep.skipped):
        slot[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_acceptance, key=int):
        title, ok, ran = _acceptance[num]
        verdict = "PASS" if ok and ran else "FAIL"
        tr.write_line(f"[{verdict}] {num}. {title}")

import pytest
from hypothesis import given, strategies as st

from srsim import _pykernels, kernels

speedups = pytest.importorskip("srsim._speedups")

entry = st.tuples(st.integers(0, 0xFFFF), st.integers(1, 0x100)).map(lambda t: (t[0], t[0] + t[1]))


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if kernels.BACKEND == "cython":
        assert kernels.last_containing is speedups.last_containing


@given(st.lists(entry, max_size=20), st.integers(0, 0x10100), st.integers(1, 8))
def test_last_containing_parity(entries, lo, size):
    assert speedups.last_containing(entries, lo, lo + size) == \
        _pykernels.last_containing(entries, lo, lo + size)


@given(st.integers(0, 0xFFFFFFFF))
def test_decode_fields_parity(word):
    assert speedups.decode_fields(word) == _pykernels.decode_fields(word)


def test_last_containing_picks_newest():
    entries = [(0x2000, 0x2040), (0x2000, 0x2010), (0x3000, 0x3010)]
    for impl in (speedups, _pykernels):
        assert impl.last_containing(entries, 0x2008, 0x2009) == 1
        assert impl.last_containing(entries, 0x2020, 0x2024) == 0
        assert impl.last_containing(entries, 0x4000, 0x4001) == -1
        assert impl.last_containing([], 0, 1) == -1


def test_last_containing_accepts_named_tuples():
    from srsim.engine import RegionEntry
    assert speedups.last_containing([RegionEntry(0, 4)], 0, 4) == 0

"""Kernel selection: the compiled ``_speedups`` extension when importable,
otherwise the pure-Python fallback. Set ``SRSIM_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("SRSIM_PURE"):
    from srsim._pykernels import decode_fields, last_containing
    BACKEND = "python"
else:
    try:
        from srsim._speedups import decode_fields, last_containing
        BACKEND = "cython"
    except ImportError:
        from srsim._pykernels import decode_fields, last_containing
        BACKEND = "python"

__all__ = ["BACKEND", "decode_fields", "last_containing"]

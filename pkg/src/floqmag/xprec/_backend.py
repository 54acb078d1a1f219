"""Kernel selection: compiled extension if importable, numpy fallback otherwise.

Set FLOQMAG_FORCE_FALLBACK=1 to ignore the extension (used by the
benchmark and by tests that pin down backend agreement).
"""
from __future__ import annotations

import os

from . import _fallback

BACKEND = "fallback"
dd_matmul = _fallback.dd_matmul
qd_matmul = _fallback.qd_matmul

if os.environ.get("FLOQMAG_FORCE_FALLBACK", "") != "1":
    try:
        from . import _core  # compiled

        dd_matmul = _core.dd_matmul
        qd_matmul = _core.qd_matmul
        BACKEND = "compiled"
    except ImportError:
        pass

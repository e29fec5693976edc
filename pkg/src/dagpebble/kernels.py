"""Kernel selection: compiled extension when available, pure Python otherwise.

Set DAGPEBBLE_PURE=1 to force the pure-Python implementations (used by the
benchmark and by tests that cross-check the two).
"""

from __future__ import annotations

import os

from . import _ccsearch_py

if os.environ.get("DAGPEBBLE_PURE"):
    _impl = _ccsearch_py
else:
    try:
        from . import _ccsearch as _impl  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - build-env dependent
        _impl = _ccsearch_py

IMPLEMENTATION: str = _impl.IMPLEMENTATION

cc_exact_bits = _impl.cc_exact_bits
min_depth_bits = _impl.min_depth_bits
count_depth_ge_bits = _impl.count_depth_ge_bits
depths_arr = _impl.depths_arr

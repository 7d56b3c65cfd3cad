"""Merge-kernel backend selection.

Prefers the compiled extension, falls back to the pure-Python kernel when
the extension is absent or CFL_PURE_KERNEL is set.  Both backends are
drop-in equivalents; callers go through ``kernel.merge`` so the benchmark
harness can swap backends at runtime with ``use()``.
"""

from __future__ import annotations

import os

from . import _kernel as _pure

try:
    from . import _ckernel as _compiled
except ImportError:
    _compiled = None

_impl = _pure if (os.environ.get("CFL_PURE_KERNEL") or _compiled is None) else _compiled

merge = _impl.merge
BACKEND = _impl.BACKEND


def available() -> list[str]:
    return ["pure"] + (["compiled"] if _compiled is not None else [])


def use(backend: str) -> str:
    """Select a backend by name ("pure" or "compiled"); returns the old name."""
    global _impl, merge, BACKEND
    old = BACKEND
    if backend == "pure":
        _impl = _pure
    elif backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        _impl = _compiled
    else:
        raise ValueError(f"unknown kernel backend {backend!r}")
    merge = _impl.merge
    BACKEND = _impl.BACKEND
    return old

"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy/pure-Python
fallback takes over. Tests and the benchmark switch explicitly with
:func:`set_backend`.
"""

from __future__ import annotations

from types import ModuleType

from . import _fallback

try:  # pragma: no cover - depends on the build
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None else _fallback


def compiled_available() -> bool:
    return _compiled is not None


def available() -> tuple[str, ...]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "cython")
    return tuple(names)


def get() -> ModuleType:
    return _active


def name() -> str:
    return _active.NAME


def set_backend(which: str) -> str:
    """Select ``"cython"`` or ``"python"``; returns the previous backend name."""
    global _active
    prev = _active.NAME
    if which == "python":
        _active = _fallback
    elif which == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {which!r}")
    return prev

"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
fallback. Setting ``HRPCA_PURE_PYTHON=1`` forces the fallback. Callers
must go through ``_backend.core`` at call time so ``use_backend`` works.
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from types import ModuleType

from . import _core_py

_compiled: ModuleType | None
try:
    if os.environ.get("HRPCA_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend forced")
    from . import _core as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None

_BACKENDS: dict[str, ModuleType] = {"python": _core_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

core: ModuleType = _compiled if _compiled is not None else _core_py
BACKEND: str = "cython" if _compiled is not None else "python"


def available() -> list[str]:
    return sorted(_BACKENDS)


def get(name: str) -> ModuleType:
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available (have {available()})") from None


def set_backend(name: str) -> None:
    global core, BACKEND
    core = get(name)
    BACKEND = name


@contextmanager
def use_backend(name: str):
    prev = BACKEND
    set_backend(name)
    try:
        yield core
    finally:
        set_backend(prev)

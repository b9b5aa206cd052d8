"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; otherwise, or when
``OPTOSCATTER_PURE_PYTHON`` is set to a non-empty value, the numpy twin in
``_core_py`` is used. Both expose ``rate_grid`` and ``birth_death_rk4``.
"""
import importlib
import os
from types import ModuleType

from . import _core_py

__all__ = ["BACKEND", "COLUMNS", "available_backends", "get_backend", "rate_grid", "birth_death_rk4"]

COLUMNS = _core_py.COLUMNS


def _load_compiled() -> ModuleType | None:
    try:
        return importlib.import_module("optoscatter._core")
    except ImportError:
        return None


_compiled = _load_compiled()


def available_backends() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ('cython' or 'python'), default best available."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _core_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels not built; run `pip install -e .` with Cython available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


if os.environ.get("OPTOSCATTER_PURE_PYTHON") or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_active = get_backend(BACKEND)
rate_grid = _active.rate_grid
birth_death_rk4 = _active.birth_death_rk4

"""Select the kernel implementation once, at import.

The compiled extension is preferred; set ``CATQED_BACKEND=python`` to force
the numpy fallback (the test suite exercises both).
"""

import importlib
import os

from . import _kernels_py


def load(name: str | None = None):
    """Return the kernel module for ``name`` ('cython' or 'python')."""
    if name == "python":
        return _kernels_py
    if name not in (None, "cython"):
        raise ValueError(f"unknown backend {name!r}; expected 'cython' or 'python'")
    try:
        return importlib.import_module("catqed._kernels")
    except ImportError:
        if name == "cython":
            raise
        return _kernels_py


def available() -> list[str]:
    names = ["python"]
    try:
        importlib.import_module("catqed._kernels")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


kernels = load(os.environ.get("CATQED_BACKEND") or None)
BACKEND = kernels.NAME

"""Dynamic forest backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
implementation is loaded.  Set ``DYDBSCAN_BACKEND=python`` to force the
fallback (useful for debugging and for the backend comparison benchmark).
"""

from __future__ import annotations

import os

from ._forest_py import EulerTourForest as PyEulerTourForest

try:
    from ._forest_ext import EulerTourForest as ExtEulerTourForest
except ImportError:  # extension not built
    ExtEulerTourForest = None

__all__ = [
    "BACKEND",
    "EulerTourForest",
    "ExtEulerTourForest",
    "PyEulerTourForest",
    "available_backends",
    "make_forest",
]


def available_backends() -> list[str]:
    names = ["python"]
    if ExtEulerTourForest is not None:
        names.insert(0, "ext")
    return names


def _select(name: str | None):
    name = (name or "auto").lower()
    if name == "python":
        return PyEulerTourForest
    if name == "ext":
        if ExtEulerTourForest is None:
            raise ImportError("compiled forest extension is not built")
        return ExtEulerTourForest
    if name == "auto":
        return ExtEulerTourForest or PyEulerTourForest
    raise ValueError(f"unknown forest backend {name!r}")


EulerTourForest = _select(os.environ.get("DYDBSCAN_BACKEND"))
BACKEND = EulerTourForest.backend


def make_forest(seed: int = 0, backend: str | None = None):
    """Build an empty forest; ``backend`` is 'auto', 'ext' or 'python'."""
    cls = EulerTourForest if backend is None else _select(backend)
    return cls(seed)

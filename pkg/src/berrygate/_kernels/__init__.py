"""Propagation kernel selection: compiled Cython core when available, pure
numpy otherwise. Both expose the same ``propagate`` signature."""

from . import _pykernels

try:  # pragma: no cover - depends on build environment
    from . import _core
    _DEFAULT = _core
except ImportError:  # pragma: no cover
    _core = None
    _DEFAULT = _pykernels

BACKEND_NAME = _DEFAULT.BACKEND_NAME
propagate = _DEFAULT.propagate


def available_backends():
    names = ["python"]
    if _core is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str):
    """Return the kernel module for ``name`` in {"compiled", "python"}."""
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _core is None:
            raise ImportError("compiled kernel is not built")
        return _core
    raise ValueError(f"unknown kernel backend {name!r}")

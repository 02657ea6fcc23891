"""Backend selection for the hot kernels.

The compiled Cython module is used when it imports; otherwise the numpy
fallback.  Setting ``OMTL_BACKEND=python`` in the environment forces the
fallback at import time, and :func:`use_backend` switches at runtime.
"""
import contextlib
import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_requested = os.environ.get("OMTL_BACKEND", "").strip().lower()
if _requested and _requested not in _BACKENDS:
    raise ImportError(
        f"OMTL_BACKEND={_requested!r} is not available; choose from {sorted(_BACKENDS)}"
    )
_active = _requested or ("cython" if _compiled is not None else "python")


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return _active


def active():
    """Module implementing the kernels for the current backend."""
    return _BACKENDS[_active]


def get(name):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None


def set_backend(name):
    global _active
    get(name)
    _active = name


@contextlib.contextmanager
def use_backend(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)

"""Backend switch for the compiled kernels.

The numba kernels are used when numba imports and the environment variable
``BALLBEAM_BACKEND`` is unset or ``numba``. Setting it to ``numpy`` forces the
pure-numpy code paths everywhere.
"""
import os
from contextlib import contextmanager

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_VAR = "BALLBEAM_BACKEND"

_backend = os.environ.get(ENV_VAR, "numba").strip().lower()
if _backend not in ("numba", "numpy"):
    raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {_backend!r}")


def njit(func=None, **options):
    """``numba.njit`` with caching on, or the identity when numba is absent."""
    options.setdefault("cache", True)

    def wrap(f):
        if numba is None:
            return f
        return numba.njit(**options)(f)

    if func is None:
        return wrap
    return wrap(func)


def numba_available():
    return numba is not None


def numba_enabled():
    return numba is not None and _backend == "numba"


def current_backend():
    return "numba" if numba_enabled() else "numpy"


@contextmanager
def use_backend(name):
    """Temporarily select ``"numba"`` or ``"numpy"``."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    previous = _backend
    _backend = name
    try:
        yield
    finally:
        _backend = previous

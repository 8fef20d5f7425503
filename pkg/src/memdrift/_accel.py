"""Kernel backend selection.

MEMDRIFT_BACKEND=numba|numpy|auto (default auto: numba when importable).
The numba path compiles the scalar/loop kernels in _kernels_numba with
@njit(cache=True); the numpy path runs vectorized equivalents from
_kernels_numpy and leaves the scalar helpers as plain Python.
"""

import logging
import os

log = logging.getLogger("memdrift")

_requested = os.environ.get("MEMDRIFT_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"MEMDRIFT_BACKEND={_requested!r} not understood (use numba, numpy, or auto)"
    )

_numba_njit = None
if _requested in ("auto", "numba"):
    try:
        from numba import njit as _numba_njit  # type: ignore
    except ImportError:
        if _requested == "numba":
            raise RuntimeError("MEMDRIFT_BACKEND=numba but numba is not importable")
        log.info("numba not importable; falling back to numpy kernels")

BACKEND = "numba" if _numba_njit is not None else "numpy"


def jit(fn):
    """numba.njit in the numba backend, identity otherwise."""
    if BACKEND == "numba":
        return _numba_njit(cache=True)(fn)
    return fn

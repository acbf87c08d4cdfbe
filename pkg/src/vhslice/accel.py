"""Optional numba acceleration for the hot per-TTI kernels.

The kernels in :mod:`vhslice.kernels` are written as plain loops over numpy
arrays so that the exact same function bodies can run either compiled (numba
``@njit``) or interpreted.  Compilation is used when numba imports cleanly
and the environment variable ``VHSLICE_DISABLE_NUMBA`` is unset (or set to
``0``/``false``/``no``).  Both paths execute the identical sequence of
floating-point and integer operations, so results are bit-identical.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import os


def _numba_requested() -> bool:
    flag = os.environ.get("VHSLICE_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


NUMBA_ENABLED = False
_njit = None
if _numba_requested():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _njit = None


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when acceleration is enabled, identity otherwise.

    Usable both bare (``@maybe_njit``) and with options
    (``@maybe_njit(cache=True)``).
    """
    if args and callable(args[0]) and not kwargs:
        func = args[0]
        if NUMBA_ENABLED:
            return _njit(func)
        return func

    def decorate(func):
        if NUMBA_ENABLED:
            return _njit(*args, **kwargs)(func)
        return func

    return decorate

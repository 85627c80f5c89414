"""Numba switch for the hot kernels.

Set ``EDGECODING_NO_NUMBA=1`` to force the pure-numpy paths, e.g. when
numba is unavailable or when comparing both backends.
"""

from __future__ import annotations

import os

_disabled = os.environ.get("EDGECODING_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError("numba disabled by EDGECODING_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"

"""Numba shim.

Set ``REFUSION_NUMBA=0`` to force the pure-numpy kernels. When numba is
missing, ``njit`` degrades to a no-op decorator so the loop kernels still
import (and run, slowly) as plain Python.
"""

import logging
import os

logger = logging.getLogger(__name__)

_FLAG = os.environ.get("REFUSION_NUMBA", "1").strip().lower()

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    if NUMBA_AVAILABLE:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    def wrap(func):
        return func

    if len(args) == 1 and callable(args[0]):
        return args[0]
    return wrap


if not USE_NUMBA:
    logger.debug("numba kernels disabled; using numpy fallbacks")

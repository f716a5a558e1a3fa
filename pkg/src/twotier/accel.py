"""JIT compilation switch for the hot numeric kernels.

The kernels in :mod:`twotier.kernels` are written so that the exact same
code runs either compiled by numba or as plain Python over numpy arrays.
Setting ``TWOTIER_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``)
selects the pure-Python path; a missing numba installation falls back the
same way.  Both paths draw from the same ``numpy.random.Generator`` objects
and produce bit-identical results.
"""

import os

_FALSEY = ("", "0", "false", "no")


def _jit_enabled() -> bool:
    for var in ("TWOTIER_DISABLE_NUMBA", "NUMBA_DISABLE_JIT"):
        if os.getenv(var, "").strip().lower() not in _FALSEY:
            return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _jit_enabled()

if USE_NUMBA:
    from numba import njit
else:

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit: returns the function unchanged."""
        if args and callable(args[0]):
            return args[0]

        def decorate(func):
            return func

        return decorate

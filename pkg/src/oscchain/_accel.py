"""Optional numba acceleration.

Set ``OSCCHAIN_DISABLE_NUMBA=1`` in the environment (before importing the
package) to force the pure-numpy code paths. If numba cannot be imported the
numpy paths are used automatically.
"""
import os

_disabled = os.environ.get("OSCCHAIN_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("disabled by OSCCHAIN_DISABLE_NUMBA")
    # skip the TBB probe, which warns on older TBB installs
    os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")
    import numba
    from numba import prange

    HAVE_NUMBA = True

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return numba.njit(*args, **kwargs)

except ImportError:
    numba = None
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"

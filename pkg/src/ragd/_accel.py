"""Backend selection for the hot numeric kernels.

Set ``RAGD_NUMBA=0`` in the environment to force the pure-numpy path.
When numba is not importable the numpy path is used regardless.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_enabled():
    flag = os.environ.get("RAGD_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _env_enabled()


def njit(fn):
    """Compile ``fn`` with numba in nopython mode, if numba is installed.

    Compilation is lazy (first call). Without numba the function is
    returned unchanged, which keeps the loop kernels importable and
    testable as plain Python.
    """
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=False, nogil=True)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"

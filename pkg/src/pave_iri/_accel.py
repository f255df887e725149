"""Select between numba-compiled kernels and the pure-numpy fallback.

Set ``PAVE_IRI_NO_JIT=1`` to force the numpy path (also used automatically
when numba is not importable). The choice is read once at import time; tests
that need both paths call the backend functions directly.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_JIT = HAVE_NUMBA and os.environ.get("PAVE_IRI_NO_JIT", "").strip().lower() not in ("1", "true", "yes")


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged.

    fastmath stays off: the numba and numpy paths must agree bit for bit.
    """
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, fastmath=False)(fn)


def backend_name() -> str:
    return "numba" if USE_JIT else "numpy"

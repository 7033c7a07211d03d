"""Kernel backend selection.

Hot loops are written twice: an explicit-loop version compiled with numba's
``@njit`` and a vectorised pure-numpy version.  The default backend is numba
when it imports cleanly; set ``PHSHARE_NUMBA=0`` in the environment to force
the numpy path (useful on platforms without an LLVM toolchain, and for
benchmarking one against the other).
"""

import os
import warnings

_FALSY = {"0", "false", "no", "off", ""}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    numba = None
    HAVE_NUMBA = False


def _env_wants_numba():
    return os.environ.get("PHSHARE_NUMBA", "1").strip().lower() not in _FALSY


_state = {"backend": "numba" if (HAVE_NUMBA and _env_wants_numba()) else "numpy"}


def get_backend():
    """Return the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return _state["backend"]


def set_backend(name):
    """Switch the kernel backend at runtime.  Returns the previous value."""
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        warnings.warn("numba is not installed; staying on the numpy backend")
        name = "numpy"
    prev = _state["backend"]
    _state["backend"] = name
    return prev


def njit(fn):
    """``numba.njit(cache=True)`` when numba is importable, else identity.

    The compiled function is only dispatched to when the numba backend is
    active, so the identity fallback is never called in a hot path.
    """
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn

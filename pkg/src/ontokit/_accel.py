"""Numba toggle shared by the hot kernels.

The assignment solver and the triad census ship in two flavours: a numba
``@njit`` build and a plain numpy/Python build. The jitted flavour is used
when numba imports cleanly and ``ONTOKIT_NO_NUMBA`` is unset; setting
``ONTOKIT_NO_NUMBA=1`` forces the fallback everywhere. Individual calls can
still override the default with their ``use_numba`` keyword, which is what
the benchmark script does to time both paths in one process.
"""

from __future__ import annotations

import os

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    _HAVE_NUMBA = False

ENV_VAR = "ONTOKIT_NO_NUMBA"


def numba_available() -> bool:
    return _HAVE_NUMBA


def numba_enabled() -> bool:
    """True when the jitted kernel flavour should be used by default."""
    if not _HAVE_NUMBA:
        return False
    return os.environ.get(ENV_VAR, "").strip().lower() not in ("1", "true", "yes", "on")


def resolve_use_numba(use_numba: bool | None) -> bool:
    if use_numba is None:
        return numba_enabled()
    return bool(use_numba) and _HAVE_NUMBA


def jit_compile(func):
    """Compile ``func`` with njit, falling back to the plain function."""
    if not _HAVE_NUMBA:  # pragma: no cover
        return func
    return njit(cache=True)(func)

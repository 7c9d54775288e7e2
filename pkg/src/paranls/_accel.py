"""Numba/numpy backend selection for the hot kernels.

The resonance scans, the Monte-Carlo bad-set sampler and the multilinear
paraproduct accumulation have two implementations each: a numba ``@njit``
loop kernel and a vectorized pure-numpy fallback.  The fallback is selected
by setting the environment variable ``PARANLS_NO_NUMBA`` to a truthy value
("1", "true", "yes") before import, or at runtime via
:func:`set_numba_enabled`.  Both paths produce bit-identical results;
``benchmarks/bench_kernels.py`` times them side by side.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_disabled():
    return os.environ.get("PARANLS_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


_numba_enabled = HAVE_NUMBA and not _env_disabled()


def numba_enabled():
    """True when the njit kernels are active (numpy fallback otherwise)."""
    return _numba_enabled


def set_numba_enabled(flag):
    """Runtime override of the backend choice; returns the previous value."""
    global _numba_enabled
    previous = _numba_enabled
    _numba_enabled = bool(flag) and HAVE_NUMBA
    return previous


def njit_or_plain(func):
    """Compile with numba when available; keep the plain function otherwise.

    The compiled object is created eagerly at import so both paths are
    importable even when numba is missing.  Dispatch between the two happens
    at call sites through :func:`numba_enabled`.
    """
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func

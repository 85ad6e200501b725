"""Kernel backend selection.

Hot inner loops exist twice: a scalar-loop version compiled with numba
(:mod:`henon_ergodic._kernels_loop`) and a vectorized pure-numpy fallback
(:mod:`henon_ergodic._kernels_numpy`).  The environment variable
``HENON_ERGODIC_BACKEND`` forces one of ``numba`` / ``numpy``; by default
numba is used when importable.  Both implementations follow the same
per-point operation order, so results agree to the last bit in practice.
"""

from __future__ import annotations

import os

_ENV_VAR = "HENON_ERGODIC_BACKEND"


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def backend_name() -> str:
    """Active backend, re-read from the environment on each call."""
    forced = os.environ.get(_ENV_VAR, "").strip().lower()
    if forced == "numpy":
        return "numpy"
    if forced == "numba":
        if not numba_available():
            raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")
        return "numba"
    if forced:
        raise RuntimeError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {forced!r}")
    return "numba" if numba_available() else "numpy"

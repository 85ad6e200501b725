"""Backend dispatch for the hot kernels.

``green_steps``, ``classify_steps``, ``orbit_final`` and ``bowen_greedy``
resolve to the numba-compiled loop kernels or the numpy fallbacks depending
on :func:`henon_ergodic.backend.backend_name` (re-checked per call, so the
``HENON_ERGODIC_BACKEND`` variable can be flipped between calls in tests and
benchmarks).
"""

from __future__ import annotations

from . import _kernels_loop as _loop
from . import _kernels_numpy as _vec
from .backend import backend_name

RUNNING = _loop.RUNNING
DONE_CERT = _loop.DONE_CERT
DONE_FAST = _loop.DONE_FAST
FAILED = _loop.FAILED

_KERNEL_NAMES = ("green_steps", "classify_steps", "orbit_final", "bowen_greedy")
_jitted: dict = {}


def _numba_kernel(name):
    fn = _jitted.get(name)
    if fn is None:
        from numba import njit
        fn = njit(cache=True, nogil=True)(getattr(_loop, name))
        _jitted[name] = fn
    return fn


def _resolve(name):
    if backend_name() == "numba":
        return _numba_kernel(name)
    return getattr(_vec, name)


def warmup() -> str:
    """Force JIT compilation of all kernels; returns the active backend."""
    name = backend_name()
    if name == "numba":
        for kname in _KERNEL_NAMES:
            _numba_kernel(kname)
    return name


def green_steps(*args):
    return _resolve("green_steps")(*args)


def classify_steps(*args):
    return _resolve("classify_steps")(*args)


def orbit_final(*args):
    return _resolve("orbit_final")(*args)


def bowen_greedy(*args):
    return _resolve("bowen_greedy")(*args)

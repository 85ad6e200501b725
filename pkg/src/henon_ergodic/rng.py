"""Deterministic, random-access RNG streams.

Every random draw in the package comes from a Philox generator keyed by a
hash of (seed, stream tag, indices...), so any term of any stream can be
regenerated independently of evaluation order or thread schedule.
"""

from __future__ import annotations

import numpy as np

_M = (1 << 64) - 1

# stream tags
SEQ_TERM = 0x5E01
FILTRATION = 0xF117
AVERAGING = 0xA7E6
THETA = 0x7E7A
MEASURE = 0x3EA5
LYAPUNOV = 0x17AF
ENTROPY = 0xE574
GENERIC = 0x6E4E


def _mix64(v: int) -> int:
    v = (v + 0x9E3779B97F4A7C15) & _M
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _M
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _M
    return (v ^ (v >> 31)) & _M


def philox_key(*parts: int) -> np.ndarray:
    h1 = 0x243F6A8885A308D3
    h2 = 0x13198A2E03707344
    for p in parts:
        p = int(p) & _M
        h1 = _mix64(h1 ^ p)
        h2 = _mix64((h2 + p) & _M)
    return np.array([h1, h2], dtype=np.uint64)


def generator(*parts: int) -> np.random.Generator:
    """A fresh Generator for the stream identified by the given parts."""
    return np.random.Generator(np.random.Philox(key=philox_key(*parts)))


def derive_seed(*parts: int) -> int:
    """A 63-bit sub-seed for the stream identified by the given parts."""
    return int(philox_key(*parts)[0] >> np.uint64(1))

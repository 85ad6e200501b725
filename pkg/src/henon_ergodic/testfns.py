"""Catalog of smooth test functions for pairings and correlation estimates.

The radial bump (1 - (r/rho)^2)^3 is C^2 with compact support and has a
closed-form Laplacian, so current pairings <T, phi> can be computed through
potentials without numerical differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .maps import ParameterPoint

# max of |d/dr (1-(r/rho)^2)^3| * rho, attained at (r/rho)^2 = 1/5
_GRAD_MAX = 96.0 / (25.0 * math.sqrt(5.0))


@dataclass(frozen=True)
class RadialBump:
    """phi(t) = height * (1 - |t - center|^2 / radius^2)^3 inside the disc."""

    center: complex = 0j
    radius: float = 1.0
    height: float = 1.0

    def __call__(self, t: np.ndarray) -> np.ndarray:
        w = np.abs(np.asarray(t) - self.center) ** 2 / self.radius ** 2
        out = np.where(w < 1.0, self.height * (1.0 - w) ** 3, 0.0)
        return out

    def laplacian(self, t: np.ndarray) -> np.ndarray:
        """Closed-form 2D Laplacian: height*(1-w)(36w-12)/radius^2, w=(r/rho)^2."""
        w = np.abs(np.asarray(t) - self.center) ** 2 / self.radius ** 2
        val = self.height * (1.0 - w) * (36.0 * w - 12.0) / self.radius ** 2
        return np.where(w < 1.0, val, 0.0)

    def c1_norm(self) -> float:
        return abs(self.height) * (1.0 + _GRAD_MAX / self.radius)


@dataclass(frozen=True)
class ProductBump:
    """Compactly supported bump on C^2: bump(x) * bump(y)."""

    x_bump: RadialBump
    y_bump: RadialBump

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.x_bump(x) * self.y_bump(y)


@dataclass(frozen=True)
class BaseWave:
    """cos(2 pi k . theta) in the angle coordinates of circle/torus points;
    constant 1 on zero-dimensional bases."""

    freqs: tuple[int, ...] = ()

    def __call__(self, lam: ParameterPoint) -> float:
        if not self.freqs:
            return 1.0
        phase = 0.0
        for k, c in zip(self.freqs, lam.coords):
            phase += k * math.atan2(c.imag, c.real)
        return math.cos(phase)


@dataclass(frozen=True)
class SkewObservable:
    """Continuous compactly supported observable on M x C^2: wave x bump."""

    wave: BaseWave
    bump: ProductBump

    def __call__(self, lam: ParameterPoint, x, y):
        return self.wave(lam) * self.bump(x, y)


def fiber_bump(center: tuple[complex, complex] = (0j, 0j),
               radius: float = 1.5, height: float = 1.0) -> ProductBump:
    return ProductBump(RadialBump(center[0], radius, height),
                       RadialBump(center[1], radius, 1.0))


def catalog_pair(radius: float, offset: complex = 0.3 + 0.2j):
    """A default (phi, psi) observable pair supported in the dynamical box."""
    phi = fiber_bump(center=(offset, offset), radius=radius)
    psi = fiber_bump(center=(-offset, -offset), radius=radius)
    return phi, psi

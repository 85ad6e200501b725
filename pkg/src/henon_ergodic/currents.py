"""Slice-level Green currents: pairings, pullback convergence, sampling.

Currents are represented through potentials only.  Every pairing
<T, phi> used here reduces to a slice integral of (potential) * (Laplacian
of phi) / (2 pi), evaluated by the midpoint rule on a uniform grid, so no
4D grids are ever built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import (FiltrationData, get_filtration, green_many,
                     orbit_terminal)
from .errors import BudgetError, ConfigError
from .maps import (BaseDynamics, HenonFamily, ParameterDomain, ParameterPoint,
                   Point2)
from .rng import THETA, derive_seed
from .sequences import (ParameterSequence, iid_sequence, sigma_orbit_sequence)
from .slices import SliceMeasureField, SliceSpec, slice_laplacian_measure
from .testfns import RadialBump

NEG_INF = float("-inf")


# --- quasi-potential catalog --------------------------------------------------


@dataclass(frozen=True)
class QuasiPotential:
    """A catalog potential with logarithmic growth.

    Kinds: ``vertical`` u(z) = log+|y|; ``vertical-shift`` u(z) =
    log+|y - shift|; ``poly`` u(z) = (1/deg P) log|P(x, y)| for a polynomial
    given as monomials (i, j, coeff) meaning coeff * x^i y^j.

    ``bounded_near_attractor`` asserts that u - log|y| stays bounded deep in
    the forward escape cone (the chart neighborhood of the attracting point
    at infinity), which is the admissibility hypothesis for the pullback
    convergence statements.  For ``poly`` this holds exactly when the
    top-degree part contains a pure y^degP monomial.
    """

    kind: str
    shift: complex = 0j
    monomials: tuple[tuple[int, int, complex], ...] = ()

    def __post_init__(self):
        if self.kind not in ("vertical", "vertical-shift", "poly"):
            raise ConfigError(f"unknown quasi-potential kind {self.kind!r}")
        if self.kind == "poly" and not self.monomials:
            raise ConfigError("poly potential needs monomials")

    @property
    def poly_degree(self) -> int:
        return max(i + j for i, j, _ in self.monomials) if self.monomials else 0

    @property
    def bounded_near_attractor(self) -> bool:
        if self.kind in ("vertical", "vertical-shift"):
            return True
        deg = self.poly_degree
        top_y = sum(c for i, j, c in self.monomials if i == 0 and j == deg)
        return abs(top_y) > 0

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "vertical":
            return np.log(np.maximum(np.abs(y), 1.0))
        if self.kind == "vertical-shift":
            return np.log(np.maximum(np.abs(y - self.shift), 1.0))
        deg = self.poly_degree
        val = np.zeros_like(x)
        for i, j, c in self.monomials:
            val = val + c * (x ** i) * (y ** j)
        mag = np.maximum(np.abs(val), 1e-300)
        return np.log(mag) / deg

    def evaluate_terminal(self, x, y, lx, ly, logmode) -> np.ndarray:
        """Evaluate on orbit-terminal states, using log magnitudes where the
        orbit left the exactly-representable range (deep escape: u ~ log|y|
        plus a bounded constant that cancels in pairings)."""
        lm = logmode.astype(bool)
        out = np.empty(x.shape[0])
        if (~lm).any():
            out[~lm] = self.evaluate(x[~lm], y[~lm])
        if lm.any():
            asym = ly[lm]
            if self.kind == "poly":
                deg = self.poly_degree
                top_y = sum(c for i, j, c in self.monomials if i == 0 and j == deg)
                asym = asym + math.log(abs(top_y)) / deg
            out[lm] = asym
        return out


def quasi_vertical() -> QuasiPotential:
    return QuasiPotential("vertical")


def quasi_vertical_shift(c: complex) -> QuasiPotential:
    return QuasiPotential("vertical-shift", shift=c)


def quasi_poly(monomials) -> QuasiPotential:
    return QuasiPotential("poly", monomials=tuple(
        (int(i), int(j), complex(c)) for i, j, c in monomials))


# --- pairings -----------------------------------------------------------------


def pair_against_laplacian(potential: np.ndarray, bump: RadialBump,
                           spec: SliceSpec) -> float:
    """Midpoint-rule <dd^c(potential)/2pi, phi> = int potential * lap(phi) / 2pi."""
    hx, hy = spec.cell_size
    lap = bump.laplacian(spec.t_grid())
    return float(np.sum(potential * lap) * hx * hy / (2.0 * math.pi))


def green_slice(family: HenonFamily, seq: ParameterSequence, sign: int,
                spec: SliceSpec, tol: float,
                filt: Optional[FiltrationData] = None):
    """G^sign on a slice grid, shape (ny, nx)."""
    xg, yg = spec.points()
    v, e, _, esc = green_many(family, seq, sign, xg.ravel(), yg.ravel(), tol,
                              filt)
    shape = xg.shape
    return v.reshape(shape), e.reshape(shape), esc.reshape(shape)


def green_current_slice(family: HenonFamily, seq: ParameterSequence, sign: int,
                        spec: SliceSpec, tol: float,
                        filt: Optional[FiltrationData] = None) -> SliceMeasureField:
    """Slice measure of the Green current: Laplacian of the sampled potential."""
    vals, _, _ = green_slice(family, seq, sign, spec, tol, filt)
    return slice_laplacian_measure(vals, spec.cell_size, spec,
                                   clamp_negative=True)


def pullback_pairing_error(family: HenonFamily, seq: ParameterSequence,
                           potential: QuasiPotential, n: int, bump: RadialBump,
                           spec: SliceSpec, tol: float = 1e-10,
                           filt: Optional[FiltrationData] = None,
                           green_vals: Optional[np.ndarray] = None) -> float:
    """e_n = |<d^-n (pullback of S by the n-fold composition) - mu^+, phi>|.

    Computed at slice level through potentials: the pullback current has
    potential d^-n * u(H_n(z)), the limit current has the Green potential.
    ``green_vals`` lets callers reuse the Green grid across n.
    """
    if not potential.bounded_near_attractor:
        raise ConfigError(
            "potential is not bounded near the attracting point at infinity;"
            " the convergence hypothesis cannot be asserted")
    if filt is None:
        filt = get_filtration(family)
    xg, yg = spec.points()
    shape = xg.shape
    if green_vals is None:
        green_vals, _, _ = green_slice(family, seq, +1, spec, tol, filt)
    x, y, lx, ly, lm = orbit_terminal(family, seq, +1, xg.ravel(), yg.ravel(), n)
    u_n = potential.evaluate_terminal(x, y, lx, ly, lm).reshape(shape)
    d = family.degree
    v = (d ** (-float(n))) * u_n - green_vals
    return abs(pair_against_laplacian(v, bump, spec))


def theta_iterate_potential(family: HenonFamily, potential: QuasiPotential,
                            n: int, n_paths: int, seed: int, spec: SliceSpec,
                            filt: Optional[FiltrationData] = None) -> np.ndarray:
    """Potential grid of the n-th averaged pullback Theta^n(S).

    Theta averages the degree-normalized pullback over the parameter
    measure; its n-fold iterate is sampled by i.i.d. parameter sequences
    (one per Monte Carlo path, shared across all grid nodes).
    """
    if n < 0:
        raise ConfigError("n must be >= 0")
    if filt is None:
        filt = get_filtration(family)
    xg, yg = spec.points()
    shape = xg.shape
    d = family.degree
    acc = np.zeros(xg.size)
    for p in range(n_paths):
        seq = iid_sequence(family.domain, derive_seed(seed, THETA, p))
        x, y, lx, ly, lm = orbit_terminal(family, seq, +1, xg.ravel(),
                                          yg.ravel(), n)
        acc += potential.evaluate_terminal(x, y, lx, ly, lm)
    return ((d ** (-float(n))) * acc / n_paths).reshape(shape)


# --- backward line potential --------------------------------------------------


def backward_line_potential(family: HenonFamily, base: BaseDynamics,
                            lam: ParameterPoint, k: int, xs: np.ndarray,
                            ys: np.ndarray) -> np.ndarray:
    """d^-k log |x-coordinate| of the k-fold backward composition.

    This is the potential of the degree-normalized pullback of the line
    {x = 0} by the backward composition along the sigma-orbit of lam
    (inverse maps at sigma^-1(lam), ..., sigma^-k(lam), applied in that
    order); it converges to the fibered backward Green function.  Points
    whose backward orbit lands exactly on the line yield -inf (sentinel).
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    seq = sigma_orbit_sequence(family.domain, base, lam, "backward")
    x, y, lx, ly, lm = orbit_terminal(family, seq, -1, xs, ys, k)
    d = family.degree
    out = np.empty(xs.shape[0])
    exact = ~lm.astype(bool)
    with np.errstate(divide="ignore"):
        out[exact] = np.log(np.abs(x[exact]))
    out[~exact] = lx[~exact]
    return (d ** (-float(k))) * out


# --- equilibrium sampler ------------------------------------------------------


@dataclass
class WeightedPointCloud:
    """Weighted points approximating a fibered measure."""

    points: np.ndarray  # (N, 2) complex
    weights: np.ndarray  # (N,) float, nonnegative
    fiber: Optional[ParameterPoint] = None
    clamped_mass: float = 0.0
    dropped_mass: float = 0.0

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def pushforward(self, family: HenonFamily,
                    lam: ParameterPoint) -> "WeightedPointCloud":
        comp = family.at(lam)
        x = self.points[:, 0].copy()
        y = self.points[:, 1].copy()
        for f in comp.factors:
            p = np.full_like(y, f.poly_coeffs[-1])
            for c in reversed(f.poly_coeffs[:-1]):
                p = p * y + c
            x, y = y, p - f.a * x
        return WeightedPointCloud(points=np.stack([x, y], axis=1),
                                  weights=self.weights.copy(),
                                  fiber=self.fiber,
                                  clamped_mass=self.clamped_mass,
                                  dropped_mass=self.dropped_mass)

    def resample(self, n: int, rng) -> "WeightedPointCloud":
        """Equal-weight multinomial resample of n points."""
        w = self.weights / self.weights.sum()
        idx = rng.choice(self.weights.size, size=n, replace=True, p=w)
        return WeightedPointCloud(points=self.points[idx],
                                  weights=np.full(n, self.total_weight / n),
                                  fiber=self.fiber)


def smoothed_log_abs(y: np.ndarray, radius: float) -> np.ndarray:
    """C^2 subharmonic smoothing of log|y|: equals log|y| for |y| > radius,
    log R + (q-1)/2 - (q-1)^2/4 with q = (|y|/R)^2 inside; it matches value,
    first and second derivative at |y| = R and carries unit Riesz mass."""
    a = np.abs(y)
    q = (a / radius) ** 2
    inner = math.log(radius) + (q - 1.0) / 2.0 - (q - 1.0) ** 2 / 4.0
    with np.errstate(divide="ignore"):
        outer = np.log(np.maximum(a, 1e-300))
    return np.where(a > radius, outer, inner)


def _smoothed_log_terminal(y, ly, logmode, radius):
    lm = logmode.astype(bool)
    out = np.empty(y.shape[0])
    out[~lm] = smoothed_log_abs(y[~lm], radius)
    out[lm] = ly[lm]
    return out


def equilibrium_sampler(family: HenonFamily, base: BaseDynamics,
                        lam: ParameterPoint, n: int, resolution: int = 256,
                        filt: Optional[FiltrationData] = None,
                        drop_tol: float = 1e-12) -> WeightedPointCloud:
    """Cesaro-averaged pullback sampler for the fibered equilibrium measure.

    For each j < n, a measure on the disc {x = 0, |t| < R} is produced as
    the Laplacian of the smoothed log of the n-step forward image of the
    disc slice (fiber sigma^-j(lam)), normalized by d^n, and its cells are
    transported j steps forward along the sigma-orbit back to the fiber of
    lam; the n clouds are averaged.  Cell weights below ``drop_tol`` of the
    per-term total are dropped before transport (reported), numerically
    negative Laplacian cells are clamped (reported).
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if filt is None:
        filt = get_filtration(family)
    radius = filt.radius
    d = family.degree
    dn = float(d) ** n
    h = 2.0 * radius / resolution
    axis = -radius + h * (np.arange(resolution) + 0.5)
    tgrid = axis[None, :] + 1j * axis[:, None]
    tflat = tgrid.ravel()
    zeros = np.zeros_like(tflat)
    interior_t = tgrid[1:-1, 1:-1].ravel()
    in_disc = (np.abs(interior_t) < radius)

    all_pts = []
    all_wts = []
    clamped = 0.0
    dropped = 0.0
    lam_j = lam
    for j in range(n):
        # fiber sigma^-j(lam); its forward n-step images produce the disc
        # measure, whose cells are then transported j steps back up to lam.
        seq_j = sigma_orbit_sequence(family.domain, base, lam_j, "forward")
        x, y, lx, ly, lm = orbit_terminal(family, seq_j, +1, zeros, tflat, n)
        lvals = _smoothed_log_terminal(y, ly, lm, radius).reshape(tgrid.shape)
        field = slice_laplacian_measure(lvals, h, clamp_negative=True)
        clamped += field.clamped_mass / dn / n
        w = field.masses.ravel() / dn
        w = np.where(in_disc, w, 0.0)
        total_j = w.sum()
        keep = w >= drop_tol * max(total_j, 1e-300)
        dropped += float(w[~keep].sum()) / n
        t_keep = interior_t[keep]
        w_keep = w[keep]
        if j > 0:
            tx, ty, tlx, tly, tlm = orbit_terminal(
                family, seq_j, +1, np.zeros_like(t_keep), t_keep, j)
            # cells of the exact measure transport into V_R; discretization
            # dust that escapes instead is dropped and reported
            bound = radius * (1.0 + 1e-9)
            good = (~tlm.astype(bool) & np.isfinite(tx) & np.isfinite(ty)
                    & (np.abs(tx) <= bound) & (np.abs(ty) <= bound))
            dropped += float(w_keep[~good].sum()) / n
            pts = np.stack([tx[good], ty[good]], axis=1)
            w_keep = w_keep[good]
        else:
            pts = np.stack([np.zeros_like(t_keep), t_keep], axis=1)
        all_pts.append(pts)
        all_wts.append(w_keep / n)
        lam_j = base.inverse_step(family.domain, lam_j)
    points = np.concatenate(all_pts, axis=0)
    weights = np.concatenate(all_wts, axis=0)
    return WeightedPointCloud(points=points, weights=weights, fiber=lam,
                              clamped_mass=clamped, dropped_mass=dropped)


def disc_slice_density(family: HenonFamily, base: BaseDynamics,
                       lam: ParameterPoint, n: int, resolution: int = 512,
                       filt: Optional[FiltrationData] = None) -> WeightedPointCloud:
    """Exact-density sampling of the normalized disc measure d^-n alpha.

    For holomorphic t -> y_n(t) the Laplacian of L(y_n(t)) is exactly
    |dy_n/dt|^2 * (lap L)(y_n), so the cell weights carry no stencil smear:
    the support is exactly the cells with |y_n| <= R (whose transports stay
    in V_R), which is what Lyapunov sampling needs.  Totals are noisier
    than the five-point construction because the density is spiky.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if filt is None:
        filt = get_filtration(family)
    radius = filt.radius
    d = family.degree
    h = 2.0 * radius / resolution
    axis = -radius + h * (np.arange(resolution) + 0.5)
    t = (axis[None, :] + 1j * axis[:, None]).ravel()
    x = np.zeros_like(t)
    y = t.copy()
    dx = np.zeros_like(t)
    dy = np.ones_like(t)
    seq = sigma_orbit_sequence(family.domain, base, lam, "forward")
    with np.errstate(all="ignore"):
        for i in range(n):
            comp = family.at(seq.term(i + 1))
            for f in comp.factors:
                dp = np.zeros_like(y)
                for k in range(f.degree, 0, -1):
                    dp = dp * y + k * f.poly_coeffs[k]
                ndx, ndy = dy, -f.a * dx + dp * dy
                p = np.full_like(y, f.poly_coeffs[-1])
                for c in reversed(f.poly_coeffs[:-1]):
                    p = p * y + c
                x, y = y, p - f.a * x
                dx, dy = ndx, ndy
        q = np.abs(y) / radius
        lap_smooth = np.where(q <= 1.0, (4.0 / radius ** 2) * (1.0 - q ** 2), 0.0)
        dens = np.abs(dy) ** 2 * lap_smooth / (2.0 * math.pi)
        dens = np.where(np.isfinite(dens) & (np.abs(t) < radius), dens, 0.0)
    w = dens * h * h / (float(d) ** n)
    sel = w > 0
    pts = np.stack([np.zeros_like(t[sel]), t[sel]], axis=1)
    return WeightedPointCloud(points=pts, weights=w[sel], fiber=lam)


def histogram_distance(cloud_a: WeightedPointCloud, cloud_b: WeightedPointCloud,
                       bins: int = 32, half_width: Optional[float] = None) -> float:
    """Total-variation distance of the y-projection histograms (normalized)."""
    if half_width is None:
        pts = np.concatenate([cloud_a.points[:, 1], cloud_b.points[:, 1]])
        half_width = float(np.max(np.abs(np.concatenate(
            [pts.real, pts.imag])))) + 1e-9
    edges = np.linspace(-half_width, half_width, bins + 1)

    def hist(cloud):
        yy = cloud.points[:, 1]
        hh, _, _ = np.histogram2d(yy.real, yy.imag, bins=(edges, edges),
                                  weights=cloud.weights)
        s = hh.sum()
        return hh / s if s > 0 else hh

    return 0.5 * float(np.abs(hist(cloud_a) - hist(cloud_b)).sum())

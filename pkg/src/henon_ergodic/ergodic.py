"""Skew-product iteration, mixing estimators, Lyapunov exponents, entropy.

The skew product H(lam, z) = (sigma(lam), H_lam(z)) is iterated fiberwise;
its invariant measure is sampled by drawing base points from the
sigma-invariant uniform measure and fiber clouds from the equilibrium
sampler.  Entropy lower bounds come from greedy separated sets in the orbit
sup-metric; Lyapunov exponents from renormalized tangent evolution under
the full skew differential (base block + fiber block + the mixed
fiber-coefficient derivative of affine coefficient maps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .currents import (WeightedPointCloud, disc_slice_density,
                       equilibrium_sampler)
from .engine import FiltrationData, get_filtration
from .errors import BudgetError, ConfigError
from .maps import (BaseDynamics, HenonFamily, ParameterDomain, ParameterPoint,
                   Point2)
from .rng import LYAPUNOV, MEASURE, generator
from .sequences import sigma_orbit_sequence
from .testfns import ProductBump, SkewObservable


@dataclass(frozen=True)
class SkewState:
    lam: ParameterPoint
    z: Point2


def skew_iterate(family: HenonFamily, base: BaseDynamics, state: SkewState,
                 n: int) -> SkewState:
    """n-fold skew iterate; negative n applies the inverse skew map."""
    dom = family.domain
    base.check_domain(dom)
    lam, z = state.lam, state.z
    if n >= 0:
        for _ in range(n):
            comp = family.at(lam)
            from .maps import eval_composite
            z = eval_composite(comp, z)
            lam = base.step(dom, lam)
    else:
        from .maps import eval_composite_inverse
        for _ in range(-n):
            lam = base.inverse_step(dom, lam)
            z = eval_composite_inverse(family.at(lam), z)
    return SkewState(lam, z)


def _apply_fiber(comp, x, y):
    for f in comp.factors:
        p = np.full_like(y, f.poly_coeffs[-1])
        for c in reversed(f.poly_coeffs[:-1]):
            p = p * y + c
        x, y = y, p - f.a * x
    return x, y


# --- invariant-measure sampling ----------------------------------------------


@dataclass
class GlobalMeasureSample:
    """Weighted skew states sampling the invariant measure mu.

    Fibers are grouped: each group holds one base point and an equal-weight
    resampled fiber cloud; group weights sum to 1.
    """

    fibers: list
    base_measure: str

    def states(self):
        for lam, pts, w in self.fibers:
            yield lam, pts, w

    @property
    def n_states(self) -> int:
        return sum(p.shape[0] for _, p, _ in self.fibers)


def global_measure_sample(family: HenonFamily, base: BaseDynamics,
                          n_fibers: int, points_per_fiber: int,
                          sampler_depth: int, resolution: int, seed: int,
                          filt: Optional[FiltrationData] = None,
                          method: str = "equilibrium") -> GlobalMeasureSample:
    """Sample mu by drawing fibers from the uniform base measure and
    resampling a fiber measure on each.

    ``method='equilibrium'`` uses the Cesaro pullback cloud; ``'slice-density'``
    uses the exact-density disc slice (supported where the full forward
    horizon stays bounded, the right conditioning for tangent statistics).
    """
    if method not in ("equilibrium", "slice-density"):
        raise ConfigError(f"unknown sampling method {method!r}")
    if filt is None:
        filt = get_filtration(family)
    dom = family.domain
    base.check_domain(dom)
    if dom.kind in ("singleton",):
        lams = [dom.point] * min(n_fibers, 1)
        tag = "point"
    elif dom.kind == "finite":
        lams = list(dom.points)[:max(n_fibers, 1)]
        tag = "counting"
    else:
        rng = generator(seed, MEASURE, 0)
        lams = [dom.sample(rng) for _ in range(n_fibers)]
        tag = "haar"
    fibers = []
    wfib = 1.0 / len(lams)
    for i, lam in enumerate(lams):
        if method == "equilibrium":
            cloud = equilibrium_sampler(family, base, lam, sampler_depth,
                                        resolution, filt)
        else:
            cloud = disc_slice_density(family, base, lam, sampler_depth,
                                       resolution, filt)
        sub = cloud.resample(points_per_fiber, generator(seed, MEASURE, 1, i))
        w = np.full(points_per_fiber, wfib / points_per_fiber)
        fibers.append((lam, sub.points, w))
    return GlobalMeasureSample(fibers=fibers, base_measure=tag)


def transport_sample(family: HenonFamily, base: BaseDynamics,
                     sample: GlobalMeasureSample, n: int) -> GlobalMeasureSample:
    """Push every state forward n skew steps (weights unchanged)."""
    dom = family.domain
    out = []
    for lam, pts, w in sample.fibers:
        x = pts[:, 0].copy()
        y = pts[:, 1].copy()
        cur = lam
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(n):
                x, y = _apply_fiber(family.at(cur), x, y)
                cur = base.step(dom, cur)
        out.append((cur, np.stack([x, y], axis=1), w.copy()))
    return GlobalMeasureSample(fibers=out, base_measure=sample.base_measure)


# --- mixing -------------------------------------------------------------------


def _observable_values(obs, lam, pts):
    x = pts[:, 0]
    y = pts[:, 1]
    if isinstance(obs, SkewObservable):
        vals = obs.bump(x, y) * obs.wave(lam)
    elif isinstance(obs, ProductBump):
        vals = obs(x, y)
    else:
        vals = obs(lam, x, y)
    return np.where(np.isfinite(vals), vals, 0.0)


def mixing_correlation(family: HenonFamily, base: BaseDynamics,
                       sample: GlobalMeasureSample, phi, psi,
                       n_values: Sequence[int]) -> list[tuple[int, float]]:
    """Correlation series int (phi o H^n) psi dmu - int phi dmu_n int psi dmu.

    The evolved marginal is used for the phi mean, so a constant psi yields
    exactly zero up to the weight normalization.
    """
    if not sample.fibers:
        raise ConfigError("empty measure sample")
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values or n_values[0] < 0:
        raise ConfigError("correlation steps must be nonnegative")
    dom = family.domain
    psi0 = []
    weights = []
    for lam, pts, w in sample.fibers:
        psi0.append(_observable_values(psi, lam, pts))
        weights.append(w)
    cursors = [(lam, pts[:, 0].copy(), pts[:, 1].copy())
               for lam, pts, _ in sample.fibers]
    out = []
    step_now = 0
    for n in n_values:
        with np.errstate(over="ignore", invalid="ignore"):
            while step_now < n:
                advanced = []
                for lam, x, y in cursors:
                    x2, y2 = _apply_fiber(family.at(lam), x, y)
                    advanced.append((base.step(dom, lam), x2, y2))
                cursors = advanced
                step_now += 1
        num = 0.0
        phimean = 0.0
        psimean = 0.0
        for (lam, x, y), p0, w in zip(cursors, psi0, weights):
            pts_n = np.stack([x, y], axis=1)
            phin = _observable_values(phi, lam, pts_n)
            num += float(np.sum(w * phin * p0))
            phimean += float(np.sum(w * phin))
            psimean += float(np.sum(w * p0))
        out.append((n, num - phimean * psimean))
    return out


def random_mixing_correlation(family: HenonFamily, base: BaseDynamics,
                              lam: ParameterPoint, phi: ProductBump,
                              psi: ProductBump, n_values: Sequence[int],
                              sampler_depth: int = 6, resolution: int = 128,
                              filt: Optional[FiltrationData] = None) -> list[tuple[int, float]]:
    """Random-mixing residuals along the sigma-orbit of lam.

    For each n: int phi(H^n_lam z) psi(z) dnu_0 - int phi dnu_n int psi dnu_0
    with nu_n the equilibrium cloud at fiber sigma^n(lam).
    """
    if filt is None:
        filt = get_filtration(family)
    dom = family.domain
    cloud0 = equilibrium_sampler(family, base, lam, sampler_depth, resolution,
                                 filt)
    w0 = cloud0.weights / cloud0.total_weight
    psi0 = _observable_values(psi, lam, cloud0.points)
    x = cloud0.points[:, 0].copy()
    y = cloud0.points[:, 1].copy()
    cur = lam
    out = []
    step_now = 0
    for n in sorted(set(int(v) for v in n_values)):
        with np.errstate(over="ignore", invalid="ignore"):
            while step_now < n:
                x, y = _apply_fiber(family.at(cur), x, y)
                cur = base.step(dom, cur)
                step_now += 1
        phin = _observable_values(phi, cur, np.stack([x, y], axis=1))
        lhs = float(np.sum(w0 * phin * psi0))
        cloud_n = equilibrium_sampler(family, base, cur, sampler_depth,
                                      resolution, filt)
        wn = cloud_n.weights / cloud_n.total_weight
        phi_n_mean = float(np.sum(wn * _observable_values(phi, cur, cloud_n.points)))
        psi_0_mean = float(np.sum(w0 * psi0))
        out.append((n, lhs - phi_n_mean * psi_0_mean))
    return out


# --- Lyapunov -----------------------------------------------------------------


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda1: float
    stderr: float
    n_steps: int
    n_orbits: int
    by_start: dict = field(default_factory=dict)


def _angular_domain(domain: ParameterDomain) -> bool:
    return domain.kind in ("circle", "torus")


def lyapunov_largest(family: HenonFamily, base: BaseDynamics,
                     sample: GlobalMeasureSample, n_steps: int) -> LyapunovEstimate:
    """Largest Lyapunov exponent of the skew product by tangent renormalization.

    Evolves (delta_theta, delta_z) under the block differential: the base
    block is the constant angle-coordinate derivative of sigma, the fiber
    block the Henon Jacobian, and the mixed block the derivative of the
    affine coefficient maps in the base coordinates.  Two passes (fiber
    start direction d/dy, base start direction) are run and the larger
    estimate reported.
    """
    if n_steps < 10:
        raise ConfigError("need at least 10 steps")
    if not sample.fibers:
        raise ConfigError("empty measure sample")
    dom = family.domain
    bdim = base.tangent_dim
    amat = base.tangent_matrix()
    angular = _angular_domain(dom)
    passes = {"fiber": None}
    if bdim > 0:
        passes["base"] = None
    bound = 4.0 * get_filtration(family).radius
    results = {}
    for start in passes:
        logs = []
        for lam0, pts, w in sample.fibers:
            npts = pts.shape[0]
            x = pts[:, 0].copy()
            y = pts[:, 1].copy()
            dz = np.zeros((npts, 2), dtype=np.complex128)
            dth = np.zeros((npts, bdim)) if bdim else np.zeros((npts, 0))
            if start == "fiber":
                dz[:, 1] = 1.0
            else:
                dth[:, 0] = 1.0
            lam = lam0
            acc = np.zeros(npts)
            steps_alive = np.zeros(npts, dtype=np.int64)
            alive = np.ones(npts, dtype=bool)
            for _ in range(n_steps):
                comp = family.at(lam)
                sens = np.zeros((npts, 2, max(bdim, 1)), dtype=np.complex128)
                px = dz[:, 0].copy()
                py = dz[:, 1].copy()
                with np.errstate(over="ignore", invalid="ignore"):
                    for spec, f in zip(family.factor_specs, comp.factors):
                        dp = np.zeros_like(y)
                        for k in range(f.degree, 0, -1):
                            dp = dp * y + k * f.poly_coeffs[k]
                        if bdim:
                            gc = np.zeros((f.degree, bdim), dtype=np.complex128)
                            for k in range(f.degree):
                                gc[k] = spec.coeff_maps[k].theta_gradient(
                                    lam, bdim, angular)
                            ga = spec.a_map.theta_gradient(lam, bdim, angular)
                            ypow = np.ones_like(y)
                            gterm = np.zeros((npts, bdim), dtype=np.complex128)
                            for k in range(f.degree):
                                gterm += gc[k][None, :] * ypow[:, None]
                                ypow = ypow * y
                            gterm -= ga[None, :] * x[:, None]
                            s0 = sens[:, 0, :bdim]
                            s1 = sens[:, 1, :bdim]
                            new_s1 = (-f.a) * s0 + dp[:, None] * s1 + gterm
                            sens[:, 0, :bdim] = s1
                            sens[:, 1, :bdim] = new_s1
                        npx = py
                        npy = -f.a * px + dp * py
                        px, py = npx, npy
                        p = np.full_like(y, f.poly_coeffs[-1])
                        for c in reversed(f.poly_coeffs[:-1]):
                            p = p * y + c
                        x, y = y, p - f.a * x
                    if bdim:
                        mix = np.einsum("pij,pj->pi", sens[:, :, :bdim],
                                        dth.astype(np.complex128))
                        dz_new = np.stack([px, py], axis=1) + mix
                        dth = dth @ amat.T
                    else:
                        dz_new = np.stack([px, py], axis=1)
                    dz = dz_new
                    lam = base.step(dom, lam)
                    norm = np.sqrt(np.abs(dz[:, 0]) ** 2 + np.abs(dz[:, 1]) ** 2
                                   + (dth ** 2).sum(axis=1))
                # freeze orbits that left the dynamical box (sampler dust):
                # their stretch no longer reflects the invariant measure
                ok = (alive & np.isfinite(norm) & (norm > 0)
                      & (np.abs(x) <= bound) & (np.abs(y) <= bound))
                acc[ok] += np.log(norm[ok])
                steps_alive[ok] += 1
                dead_now = alive & ~ok
                if dead_now.any():
                    alive &= ok
                    x = np.where(alive, x, 0)
                    y = np.where(alive, y, 0)
                norm = np.where(ok, norm, 1.0)
                dz /= norm[:, None]
                if bdim:
                    dth /= norm[:, None]
            use = steps_alive >= max(10, n_steps // 2)
            if use.any():
                logs.append(acc[use] / steps_alive[use])
        if not logs:
            raise BudgetError("all Lyapunov orbits escaped the sampling box")
        allv = np.concatenate(logs)
        results[start] = (float(allv.mean()),
                          float(allv.std(ddof=1) / math.sqrt(allv.size)),
                          allv.size)
    best = max(results, key=lambda k: results[k][0])
    l1, se, cnt = results[best]
    return LyapunovEstimate(lambda1=l1, stderr=se, n_steps=n_steps,
                            n_orbits=cnt,
                            by_start={k: v[0] for k, v in results.items()})


# --- separated sets and entropy ----------------------------------------------


@dataclass
class SeparatedSetResult:
    entries: list  # (n, eps, count)
    slope: Optional[float] = None


def separated_set_count(family: HenonFamily, base: BaseDynamics,
                        lam: ParameterPoint, n: int, eps: float,
                        candidates: np.ndarray,
                        filt: Optional[FiltrationData] = None) -> int:
    """Greedy maximal eps-separated subset of the n-step survivors.

    Candidates (complex (N,2)) are filtered to points whose first n states
    stay in the box V_R, then greedily separated in the orbit sup-metric
    over the first n states.  The count is a lower bound for the true
    packing number.
    """
    if n < 1 or eps <= 0:
        raise ConfigError("need n >= 1 and eps > 0")
    if filt is None:
        filt = get_filtration(family)
    radius = filt.radius
    dom = family.domain
    npts = candidates.shape[0]
    orb = np.empty((npts, n, 4))
    x = candidates[:, 0].copy()
    y = candidates[:, 1].copy()
    alive = np.ones(npts, dtype=bool)
    cur = lam
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(n):
            orb[:, s, 0] = x.real
            orb[:, s, 1] = x.imag
            orb[:, s, 2] = y.real
            orb[:, s, 3] = y.imag
            alive &= (np.abs(x) <= radius) & (np.abs(y) <= radius)
            if s < n - 1:
                x, y = _apply_fiber(family.at(cur), x, y)
                cur = base.step(dom, cur)
    surv = np.ascontiguousarray(orb[alive])
    if surv.shape[0] == 0:
        return 0
    kept = np.empty(surv.shape[0], dtype=np.int64)
    nbase = np.zeros((surv.shape[0], n, 0))
    return int(kernels.bowen_greedy(surv, nbase, eps * eps, kept))


def separated_set_count_base(base: BaseDynamics, domain: ParameterDomain,
                             lams: list[ParameterPoint], n: int,
                             eps: float) -> int:
    """Base-only separated count in the sigma-orbit sup-metric on M."""
    if n < 1 or eps <= 0:
        raise ConfigError("need n >= 1 and eps > 0")
    k = domain.dim
    npts = len(lams)
    orb = np.empty((npts, n, 2 * k))
    for i, lam in enumerate(lams):
        cur = lam
        for s in range(n):
            for j, c in enumerate(cur.coords):
                orb[i, s, 2 * j] = c.real
                orb[i, s, 2 * j + 1] = c.imag
            if s < n - 1:
                cur = base.step(domain, cur)
    kept = np.empty(npts, dtype=np.int64)
    nbase = np.zeros((npts, n, 0))
    return int(kernels.bowen_greedy(np.ascontiguousarray(orb), nbase,
                                    eps * eps, kept))


def entropy_lower_estimate(result: SeparatedSetResult) -> float:
    """Least-squares slope of log count vs n at the smallest eps level."""
    by_eps: dict = {}
    for n, eps, count in result.entries:
        by_eps.setdefault(eps, []).append((n, count))
    if not by_eps:
        raise ConfigError("no separated-set counts given")
    eps = min(by_eps)
    pts = sorted(by_eps[eps])
    if len(pts) < 4:
        raise ConfigError("need at least 4 depth values for a slope")
    ns = np.array([p[0] for p in pts], dtype=float)
    cs = np.array([max(p[1], 1) for p in pts], dtype=float)
    slope = float(np.polyfit(ns, np.log(cs), 1)[0])
    result.slope = slope
    return slope


# --- disc area growth ---------------------------------------------------------


@dataclass(frozen=True)
class AreaGrowthResult:
    area: float
    n_triangles: int
    partial: bool


def _initial_disc_triangles(radius: float, rings: int = 8,
                            sectors: int = 48) -> np.ndarray:
    tris = []
    ang = np.exp(2j * np.pi * np.arange(sectors + 1) / sectors)
    radii = radius * np.arange(rings + 1) / rings
    for s in range(sectors):
        tris.append((0j, radii[1] * ang[s], radii[1] * ang[s + 1]))
    for r in range(1, rings):
        for s in range(sectors):
            a = radii[r] * ang[s]
            b = radii[r + 1] * ang[s]
            c = radii[r + 1] * ang[s + 1]
            d = radii[r] * ang[s + 1]
            tris.append((a, b, c))
            tris.append((a, c, d))
    return np.array(tris, dtype=np.complex128)


def disc_area_growth(family: HenonFamily, base: BaseDynamics,
                     lam: ParameterPoint, n: int,
                     filt: Optional[FiltrationData] = None,
                     edge_tol: float = 0.15,
                     max_triangles: int = 400_000) -> AreaGrowthResult:
    """Area of the n-step forward image of the vertical disc, inside V_R.

    The disc {x = 0, |t| < R} in the fiber of sigma^-n(lam) is transported
    forward n steps; the image surface is triangulated adaptively (split
    while an image edge exceeds edge_tol) and the area of the part inside
    V_R accumulated, counting boundary triangles by their inside-vertex
    fraction.  Exceeding the triangle budget flags a partial result.
    """
    if n < 0:
        raise ConfigError("n must be >= 0")
    if filt is None:
        filt = get_filtration(family)
    radius = filt.radius
    dom = family.domain
    start = base.iterate(dom, lam, -n)
    seq = sigma_orbit_sequence(dom, base, start, "forward")

    def image(tpts: np.ndarray):
        x = np.zeros_like(tpts)
        y = tpts.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(n):
                x, y = _apply_fiber(family.at(seq.term(i + 1)), x, y)
        return x, y

    tris = _initial_disc_triangles(radius)
    partial = False
    while True:
        flat = tris.reshape(-1)
        ix, iy = image(flat)
        ix = ix.reshape(-1, 3)
        iy = iy.reshape(-1, 3)
        finite = np.isfinite(ix).all(axis=1) & np.isfinite(iy).all(axis=1)
        inside = (np.abs(ix) <= radius) & (np.abs(iy) <= radius)
        relevant = inside.any(axis=1) | (
            finite & (np.abs(ix) <= 1.5 * radius).any(axis=1)
            & (np.abs(iy) <= 1.5 * radius).any(axis=1))
        edge = np.zeros(tris.shape[0])
        for a, b in ((0, 1), (1, 2), (2, 0)):
            e = np.sqrt(np.abs(ix[:, a] - ix[:, b]) ** 2
                        + np.abs(iy[:, a] - iy[:, b]) ** 2)
            e = np.where(np.isfinite(e), e, np.inf)
            edge = np.maximum(edge, e)
        refine = relevant & (edge > edge_tol)
        if not refine.any():
            break
        if tris.shape[0] + 3 * int(refine.sum()) > max_triangles:
            partial = True
            break
        keep = tris[~refine]
        split = tris[refine]
        m01 = (split[:, 0] + split[:, 1]) / 2.0
        m12 = (split[:, 1] + split[:, 2]) / 2.0
        m20 = (split[:, 2] + split[:, 0]) / 2.0
        children = np.concatenate([
            np.stack([split[:, 0], m01, m20], axis=1),
            np.stack([m01, split[:, 1], m12], axis=1),
            np.stack([m20, m12, split[:, 2]], axis=1),
            np.stack([m01, m12, m20], axis=1)], axis=0)
        tris = np.concatenate([keep, children], axis=0)
    flat = tris.reshape(-1)
    ix, iy = image(flat)
    ix = ix.reshape(-1, 3)
    iy = iy.reshape(-1, 3)
    finite = np.isfinite(ix).all(axis=1) & np.isfinite(iy).all(axis=1)
    inside_frac = ((np.abs(ix) <= radius) & (np.abs(iy) <= radius)
                   ).sum(axis=1) / 3.0
    p = np.stack([ix.real, ix.imag, iy.real, iy.imag], axis=2)
    u = p[:, 1, :] - p[:, 0, :]
    v = p[:, 2, :] - p[:, 0, :]
    uu = (u * u).sum(axis=1)
    vv = (v * v).sum(axis=1)
    uv = (u * v).sum(axis=1)
    tri_area = 0.5 * np.sqrt(np.maximum(uu * vv - uv * uv, 0.0))
    tri_area = np.where(finite, tri_area, 0.0)
    area = float(np.sum(tri_area * inside_frac))
    return AreaGrowthResult(area=area, n_triangles=int(tris.shape[0]),
                            partial=partial)

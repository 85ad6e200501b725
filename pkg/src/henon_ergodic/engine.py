"""Filtration constants, escape classification, certified Green estimation.

The filtration splits C^2 at radius R into the box V_R, the forward escape
cone V_R^+ = {|y| > |x|, |y| > R} and its mirror V_R^-.  Once a forward
orbit enters V_R u V_R^+ the normalized potentials G_n = d^-n log+ ||z_n||
satisfy |G_{n+1} - G_n| <= K d^-n, which certifies a truncation bound of
K d^-n d/(d-1) at depth n.  Deep inside the escape cone the remaining tail
is bounded analytically from the monic leading terms, which usually stops
the iteration much earlier.

All constants are sampling-based estimates inflated by a safety factor and
flagged as such in reports; they are not interval-verified bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from . import kernels
from .errors import BudgetError, ConfigError, NumericsError
from .maps import (HenonComposite, HenonFamily, ParameterPoint, Point2,
                   eval_composite, eval_composite_inverse)
from .rng import FILTRATION, generator
from .sequences import ParameterSequence, pack_steps

SAFETY = 1.25
_MARGIN_REL = 1e-6
_LADDER_MAX = 2.0 ** 16
DEFAULT_MAX_STEPS = 2048
_CHUNK = 48


@dataclass(frozen=True)
class FiltrationData:
    """Constants describing the escape filtration of a family.

    radius: filtration radius R; step_bound: bound K on the per-step change
    of the normalized log-potential on V_R u V_R^(sign); deriv_bound: max
    differential norm L over the sampled compact region; escape_radius: the
    far-field radius beyond which the analytic tail applies; tail_size /
    inverse_tail: constants of that tail; growth_constant: C in
    0 <= G <= log+||z|| + C.
    """

    radius: float
    step_bound: float
    deriv_bound: float
    escape_radius: float
    tail_size: float
    inverse_tail: float
    growth_constant: float
    margin: float
    sample_count: int
    seed: int
    sampled_estimate: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.radius) and math.isfinite(self.step_bound)):
            raise NumericsError("filtration constants must be finite")
        if self.deriv_bound < 1.0:
            raise NumericsError("derivative bound must be >= 1")
        if self.escape_radius < 10.0 * self.radius:
            raise NumericsError("escape radius must be >= 10 R")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GreenValue:
    """A Green function estimate with a certified truncation bound."""

    value: float
    depth: int
    err_bound: float
    escaped_at: Optional[int] = None

    def __post_init__(self):
        if self.value < 0 or self.err_bound < 0:
            raise NumericsError("green estimate must be nonnegative")


@dataclass(frozen=True)
class OrbitClassification:
    """Escape verdict: 'escaped' (with step), 'bounded' up to n_max, or
    'undecided' when coordinates degenerate before a verdict."""

    verdict: str
    step: Optional[int] = None
    n_max: Optional[int] = None

    @property
    def escaped(self) -> bool:
        return self.verdict == "escaped"


def holder_exponent_bound(d: int, deriv_bound: float) -> float:
    """Upper end min{1, log d / log L} of the admissible Hoelder range."""
    if d < 2:
        raise ConfigError("degree must be >= 2")
    if deriv_bound < 1.0:
        raise ConfigError("derivative bound must be >= 1")
    if deriv_bound <= d:
        return 1.0
    return math.log(d) / math.log(deriv_bound)


def compose_n(family: HenonFamily, seq: ParameterSequence, n: int, sign: int,
              z: Point2) -> Point2:
    """H^sign_{n,Lambda}(z): factor composites for terms 1..n, in order.

    n = 0 is the identity.  Raises NumericsError if coordinates overflow;
    use the Green/orbit kernels for escaping points.
    """
    if n < 0:
        raise ConfigError("composition length must be >= 0")
    for i in range(1, n + 1):
        comp = family.at(seq.term(i))
        z = eval_composite(comp, z) if sign > 0 else eval_composite_inverse(comp, z)
    return z


# --- filtration --------------------------------------------------------------


def _sample_parameters(family: HenonFamily, count: int,
                       seed: int) -> list[ParameterPoint]:
    dom = family.domain
    if dom.kind == "singleton":
        return [dom.point]
    if dom.kind == "finite":
        return list(dom.points)
    rng = generator(seed, FILTRATION, 0)
    return [dom.sample(rng) for _ in range(count)]


def _cone_holds(factor, radius: float) -> bool:
    """Sampled check that one factor maps V_R^+ into V_R^+ (and its inverse
    V_R^- into V_R^-) with strict relative margin.

    Uses the worst-case alignment of the subtracted term, so only the
    dominant coordinate is sampled over shells and phases.
    """
    margin = _MARGIN_REL * radius
    radii = radius * (1.0 + 1e-3) * (4.0 / (1.0 + 1e-3)) ** np.linspace(0, 1, 16)
    phases = np.exp(2j * np.pi * np.arange(64) / 64.0)
    u = radii[:, None] * phases[None, :]
    p = np.full_like(u, factor.poly_coeffs[-1])
    for c in reversed(factor.poly_coeffs[:-1]):
        p = p * u + c
    pabs = np.abs(p)
    r = np.abs(u)
    need = np.maximum(r, radius) + margin
    aa = abs(factor.a)
    fwd_ok = np.all(pabs - aa * r > need)
    inv_ok = np.all(pabs - r > aa * need)
    return bool(fwd_ok and inv_ok)


def _box_cone_samples(radius: float, esc_radius: float, rng) -> np.ndarray:
    """Sample points of V_R u V_R^+ (box and forward cone up to esc_radius)."""
    nbox = 4096
    xr = np.sqrt(rng.random(nbox)) * radius * np.exp(2j * np.pi * rng.random(nbox))
    yr = np.sqrt(rng.random(nbox)) * radius * np.exp(2j * np.pi * rng.random(nbox))
    box = np.stack([xr, yr], axis=1)
    shells = np.exp(np.linspace(np.log(radius * (1 + 1e-6)),
                                np.log(esc_radius), 24))
    ratios = np.array([0.0, 0.25, 0.5, 0.75, 0.999])
    ph_y = np.exp(2j * np.pi * np.arange(8) / 8.0)
    ph_x = np.exp(2j * np.pi * (np.arange(8) + 0.37) / 8.0)
    yy = (shells[:, None, None, None] * ph_y[None, :, None, None] *
          np.ones((1, 1, ratios.size, ph_x.size)))
    xx = (shells[:, None, None, None] * ratios[None, None, :, None] *
          np.ones((1, ph_y.size, 1, 1)) * ph_x[None, None, None, :])
    cone = np.stack([xx.ravel(), yy.ravel()], axis=1)
    return np.concatenate([box, cone], axis=0)


def _v_values(comp: HenonComposite, pts: np.ndarray, inverse: bool) -> np.ndarray:
    x = pts[:, 0].copy()
    y = pts[:, 1].copy()
    d = comp.degree
    mag0 = np.maximum(np.abs(x), np.abs(y))
    factors = comp.factors[::-1] if inverse else comp.factors
    for f in factors:
        u = x if inverse else y
        p = np.full_like(u, f.poly_coeffs[-1])
        for c in reversed(f.poly_coeffs[:-1]):
            p = p * u + c
        if inverse:
            x, y = (p - y) / f.a, x
        else:
            x, y = y, p - f.a * x
    mag1 = np.maximum(np.abs(x), np.abs(y))
    lp0 = np.log(np.maximum(mag0, 1.0))
    lp1 = np.log(np.maximum(mag1, 1.0))
    return lp1 / d - lp0


def _deriv_norms(comp: HenonComposite, pts: np.ndarray) -> np.ndarray:
    n = pts.shape[0]
    jac = np.zeros((n, 2, 2), dtype=np.complex128)
    jac[:, 0, 0] = 1.0
    jac[:, 1, 1] = 1.0
    x = pts[:, 0].copy()
    y = pts[:, 1].copy()
    for f in comp.factors:
        dp = np.zeros_like(y)
        for k in range(f.degree, 0, -1):
            dp = dp * y + k * f.poly_coeffs[k]
        step = np.zeros((n, 2, 2), dtype=np.complex128)
        step[:, 0, 1] = 1.0
        step[:, 1, 0] = -f.a
        step[:, 1, 1] = dp
        jac = step @ jac
        p = np.full_like(y, f.poly_coeffs[-1])
        for c in reversed(f.poly_coeffs[:-1]):
            p = p * y + c
        x, y = y, p - f.a * x
    return np.linalg.norm(jac, ord=2, axis=(1, 2))


def _inverse_log_a_sum(comp: HenonComposite) -> float:
    """|v^-| limit deep in the backward cone: (1/d) sum prod(d_k) |log|a_j||."""
    total = 0.0
    prefix = 1
    for f in comp.factors:
        total += prefix * abs(math.log(abs(f.a)))
        prefix *= f.degree
    return total / comp.degree


def compute_filtration(family: HenonFamily, sample_count: int = 32,
                       seed: int = 0) -> FiltrationData:
    """Doubling search for the filtration radius plus sampled constants.

    The radius check is conservative (worst-case alignment of the subtracted
    term per factor); K and L are sample maxima inflated by SAFETY, recorded
    as estimates.
    """
    lams = _sample_parameters(family, sample_count, seed)
    comps = [family.at(lam) for lam in lams]
    size_bound = family.coeff_size_bound()
    radius = 2.0
    while radius <= _LADDER_MAX:
        if 4.0 * radius >= size_bound + 1.0 and all(
                _cone_holds(f, radius) for comp in comps for f in comp.factors):
            break
        radius *= 2.0
    else:
        raise ConfigError(
            "could not verify the filtration inclusions up to radius"
            f" {_LADDER_MAX:g}; check the family definition")

    tail_size = size_bound
    inv_tail = max(_inverse_log_a_sum(comp) for comp in comps)
    esc_radius = max(10.0 * radius, 1e8, 2.0 * tail_size)
    rng = generator(seed, FILTRATION, 1)
    pts = _box_cone_samples(radius, esc_radius, rng)
    near = pts[np.maximum(np.abs(pts[:, 0]), np.abs(pts[:, 1])) <= 4.0 * radius]
    k_raw = 0.0
    l_raw = 1.0
    for comp in comps:
        k_raw = max(k_raw, float(np.max(np.abs(_v_values(comp, pts, False)))))
        mirrored = np.stack([pts[:, 1], pts[:, 0]], axis=1)
        k_raw = max(k_raw, float(np.max(np.abs(_v_values(comp, mirrored, True)))))
        l_raw = max(l_raw, float(np.max(_deriv_norms(comp, near))))
    deep = inv_tail + math.log1p(tail_size / esc_radius)
    step_bound = SAFETY * max(k_raw, deep, 1e-3)
    deriv_bound = max(1.0, SAFETY * l_raw)
    d = family.degree
    growth_c = step_bound * d / (d - 1.0) + math.log(max(tail_size, 1.0)) + 0.1
    return FiltrationData(radius=radius, step_bound=step_bound,
                          deriv_bound=deriv_bound, escape_radius=esc_radius,
                          tail_size=tail_size, inverse_tail=inv_tail,
                          growth_constant=growth_c, margin=_MARGIN_REL * radius,
                          sample_count=sample_count, seed=seed)


def get_filtration(family: HenonFamily, sample_count: int = 32,
                   seed: int = 0) -> FiltrationData:
    """Memoized compute_filtration keyed by (sample_count, seed)."""
    key = ("filtration", sample_count, seed)
    filt = family._cache.get(key)
    if filt is None:
        filt = compute_filtration(family, sample_count, seed)
        family._cache[key] = filt
    return filt


# --- green estimation --------------------------------------------------------


def green_many(family: HenonFamily, seq: ParameterSequence, sign: int,
               xs: np.ndarray, ys: np.ndarray, tol: float,
               filt: Optional[FiltrationData] = None,
               max_steps: int = DEFAULT_MAX_STEPS):
    """Vectorized certified Green estimation.

    Returns (value, err, depth, escaped_at) arrays; escaped_at is -1 for
    points never seen in the escape cone up to their stopping depth.
    """
    if tol <= 0:
        raise ConfigError("tolerance must be positive")
    if filt is None:
        filt = get_filtration(family)
    n = xs.shape[0]
    x = np.ascontiguousarray(xs, dtype=np.complex128).copy()
    y = np.ascontiguousarray(ys, dtype=np.complex128).copy()
    lx = np.zeros(n)
    ly = np.zeros(n)
    logmode = np.zeros(n, dtype=np.uint8)
    step = np.zeros(n, dtype=np.int64)
    entered = np.full(n, -1, dtype=np.int64)
    escaped = np.full(n, -1, dtype=np.int64)
    status = np.zeros(n, dtype=np.uint8)
    value = np.zeros(n)
    err = np.zeros(n)
    inverse = sign < 0
    tail = filt.tail_size if not inverse else filt.tail_size
    base = 1
    while True:
        running = int(np.count_nonzero(status == kernels.RUNNING))
        if running == 0:
            break
        coeffs, degs, avals = pack_steps(family, seq, base, _CHUNK)
        kernels.green_steps(x, y, lx, ly, logmode, step, entered, escaped,
                            status, value, err, coeffs, degs, avals, inverse,
                            family.degree, filt.radius, filt.escape_radius,
                            filt.step_bound, tail, tol, max_steps)
        base += _CHUNK
        if base > max_steps + _CHUNK:
            break
    if np.any(status == kernels.FAILED) or np.any(status == kernels.RUNNING):
        bad = int(np.flatnonzero((status == kernels.FAILED) |
                                 (status == kernels.RUNNING))[0])
        raise BudgetError(
            f"green estimation did not stop within {max_steps} steps at"
            f" point ({xs[bad]!r}, {ys[bad]!r})")
    return value, err, step, escaped


def green_estimate(family: HenonFamily, seq: ParameterSequence, sign: int,
                   z: Point2, tol: float,
                   filt: Optional[FiltrationData] = None) -> GreenValue:
    """Certified estimate of G^sign_Lambda(z) with err_bound <= tol."""
    value, err, depth, escaped = green_many(
        family, seq, sign, np.array([z.x]), np.array([z.y]), tol, filt)
    esc = int(escaped[0])
    return GreenValue(value=float(value[0]), depth=int(depth[0]),
                      err_bound=float(err[0]), escaped_at=None if esc < 0 else esc)


def classify_point(family: HenonFamily, seq: ParameterSequence, sign: int,
                   z: Point2, n_max: int,
                   filt: Optional[FiltrationData] = None) -> OrbitClassification:
    """Escape verdict within n_max steps (state 0 is z itself)."""
    cls = classify_many(family, seq, sign, np.array([z.x]), np.array([z.y]),
                        n_max, filt)
    return cls[0]


def classify_many(family: HenonFamily, seq: ParameterSequence, sign: int,
                  xs: np.ndarray, ys: np.ndarray, n_max: int,
                  filt: Optional[FiltrationData] = None) -> list[OrbitClassification]:
    if filt is None:
        filt = get_filtration(family)
    x = np.ascontiguousarray(xs, dtype=np.complex128)
    y = np.ascontiguousarray(ys, dtype=np.complex128)
    coeffs, degs, avals = pack_steps(family, seq, 1, n_max)
    esc_step = np.empty(x.shape[0], dtype=np.int64)
    ok = np.empty(x.shape[0], dtype=np.uint8)
    kernels.classify_steps(x.copy(), y.copy(), coeffs, degs, avals, sign < 0,
                           filt.radius, n_max, esc_step, ok)
    out = []
    for i in range(x.shape[0]):
        if not ok[i]:
            out.append(OrbitClassification("undecided", n_max=n_max))
        elif esc_step[i] >= 0:
            out.append(OrbitClassification("escaped", step=int(esc_step[i]),
                                           n_max=n_max))
        else:
            out.append(OrbitClassification("bounded", n_max=n_max))
    return out


def escape_mask(family: HenonFamily, seq: ParameterSequence, sign: int,
                xs: np.ndarray, ys: np.ndarray, n_max: int,
                filt: Optional[FiltrationData] = None) -> np.ndarray:
    if filt is None:
        filt = get_filtration(family)
    coeffs, degs, avals = pack_steps(family, seq, 1, n_max)
    esc_step = np.empty(xs.shape[0], dtype=np.int64)
    ok = np.empty(xs.shape[0], dtype=np.uint8)
    kernels.classify_steps(
        np.ascontiguousarray(xs, dtype=np.complex128).copy(),
        np.ascontiguousarray(ys, dtype=np.complex128).copy(),
        coeffs, degs, avals, sign < 0, filt.radius, n_max, esc_step, ok)
    return esc_step >= 0


def orbit_terminal(family: HenonFamily, seq: ParameterSequence, sign: int,
                   xs: np.ndarray, ys: np.ndarray, n: int):
    """Final states after exactly n composites, log-tracked past overflow.

    Returns (x, y, lx, ly, logmode); where logmode is set the complex
    coordinates are stale and (lx, ly) hold log magnitudes.
    """
    x = np.ascontiguousarray(xs, dtype=np.complex128).copy()
    y = np.ascontiguousarray(ys, dtype=np.complex128).copy()
    lx = np.zeros(x.shape[0])
    ly = np.zeros(x.shape[0])
    logmode = np.zeros(x.shape[0], dtype=np.uint8)
    if n > 0:
        coeffs, degs, avals = pack_steps(family, seq, 1, n)
        kernels.orbit_final(x, y, lx, ly, logmode, coeffs, degs, avals, sign < 0)
    return x, y, lx, ly, logmode

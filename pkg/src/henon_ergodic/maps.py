"""Generalized Henon factors, composites, parameter families, base dynamics.

A generalized Henon factor is the polynomial automorphism of C^2

    (x, y) -> (y, p(y) - a*x)

with p monic of degree >= 2 and a != 0; a composite applies a list of
factors first-to-last and has degree equal to the product of the factor
degrees.  Families assign affine (in Re/Im of the parameter coordinates)
coefficient maps over a compact parameter domain, which keeps continuity
automatic and non-vanishing of ``a`` decidable by interval arithmetic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError, FamilyError, NumericsError

_MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class Point2:
    """A point z = (x, y) in C^2; both coordinates must be finite."""

    x: complex
    y: complex

    def __post_init__(self):
        for c in (self.x, self.y):
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise NumericsError(f"non-finite coordinate in point: {c!r}")

    def sup_norm(self) -> float:
        return max(abs(self.x), abs(self.y))

    def as_tuple(self) -> tuple[complex, complex]:
        return (complex(self.x), complex(self.y))


@dataclass(frozen=True)
class HenonFactor:
    """One factor (x, y) -> (y, p(y) - a*x).

    ``poly_coeffs`` are ascending coefficients of the monic polynomial p,
    including the leading coefficient, which must be exactly 1.
    """

    poly_coeffs: tuple[complex, ...]
    a: complex

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.poly_coeffs)
        object.__setattr__(self, "poly_coeffs", coeffs)
        object.__setattr__(self, "a", complex(self.a))
        if len(coeffs) < 3:
            raise FamilyError("factor polynomial must have degree >= 2")
        if coeffs[-1] != 1:
            raise FamilyError("factor polynomial must be monic (leading coefficient 1)")
        if self.a == 0:
            raise FamilyError("factor coefficient a must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.poly_coeffs) - 1

    def poly(self, t: complex) -> complex:
        acc = self.poly_coeffs[-1]
        for c in reversed(self.poly_coeffs[:-1]):
            acc = acc * t + c
        return acc

    def poly_deriv(self, t: complex) -> complex:
        acc = 0j
        for k in range(self.degree, 0, -1):
            acc = acc * t + k * self.poly_coeffs[k]
        return acc

    def coeff_size(self) -> float:
        """1 + sum |c_i| + |a|: controls the monic-domination tail."""
        return 1.0 + sum(abs(c) for c in self.poly_coeffs[:-1]) + abs(self.a)


def eval_factor(f: HenonFactor, z: Point2) -> Point2:
    """(x, y) -> (y, p(y) - a*x); raises NumericsError on overflow."""
    return Point2(z.y, f.poly(z.y) - f.a * z.x)


def eval_factor_inverse(f: HenonFactor, w: Point2) -> Point2:
    """Algebraic inverse: (x, y) -> ((p(x) - y)/a, x)."""
    return Point2((f.poly(w.x) - w.y) / f.a, w.x)


@dataclass(frozen=True)
class HenonComposite:
    """An ordered list of factors, applied first-to-last."""

    factors: tuple[HenonFactor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        if not factors:
            raise FamilyError("composite needs at least one factor")

    @property
    def degree(self) -> int:
        d = 1
        for f in self.factors:
            d *= f.degree
        return d

    def coeff_size(self) -> float:
        return max(f.coeff_size() for f in self.factors)

    def min_abs_a(self) -> float:
        return min(abs(f.a) for f in self.factors)


def composite_degree(h: HenonComposite) -> int:
    return h.degree


def eval_composite(h: HenonComposite, z: Point2) -> Point2:
    for f in h.factors:
        z = eval_factor(f, z)
    return z


def eval_composite_inverse(h: HenonComposite, w: Point2) -> Point2:
    for f in reversed(h.factors):
        w = eval_factor_inverse(f, w)
    return w


def differential(h: HenonComposite, z: Point2) -> np.ndarray:
    """Chain-rule product of factor Jacobians [[0, 1], [-a, p'(y)]]."""
    jac = np.eye(2, dtype=np.complex128)
    for f in h.factors:
        step = np.array([[0.0, 1.0], [-f.a, f.poly_deriv(z.y)]],
                        dtype=np.complex128)
        jac = step @ jac
        z = eval_factor(f, z)
    return jac


@dataclass(frozen=True)
class ParameterPoint:
    coords: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords",
                           tuple(complex(c) for c in self.coords))

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class ParameterDomain:
    """Compact parameter domain with a normalized uniform sampling measure.

    Kinds: ``singleton``, ``circle`` (unit circle in C), ``torus``
    (S^1 x S^1 in C^2), ``box`` (product of real intervals), ``finite``.
    """

    kind: str
    point: Optional[ParameterPoint] = None
    intervals: tuple[tuple[float, float], ...] = ()
    points: tuple[ParameterPoint, ...] = ()

    def __post_init__(self):
        if self.kind not in ("singleton", "circle", "torus", "box", "finite"):
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        if self.kind == "singleton" and self.point is None:
            object.__setattr__(self, "point", ParameterPoint((0j,)))
        if self.kind == "box":
            if not self.intervals:
                raise ConfigError("box domain needs at least one interval")
            for lo, hi in self.intervals:
                if not (lo <= hi):
                    raise ConfigError(f"empty box interval [{lo}, {hi}]")
        if self.kind == "finite" and not self.points:
            raise ConfigError("finite domain needs at least one point")

    @property
    def dim(self) -> int:
        if self.kind == "singleton":
            return len(self.point)
        if self.kind == "circle":
            return 1
        if self.kind == "torus":
            return 2
        if self.kind == "box":
            return len(self.intervals)
        return len(self.points[0])

    def contains(self, lam: ParameterPoint, tol: float = _MEMBERSHIP_TOL) -> bool:
        if len(lam) != self.dim:
            return False
        c = lam.coords
        if self.kind == "singleton":
            return max(abs(a - b) for a, b in zip(c, self.point.coords)) <= tol
        if self.kind == "circle":
            return abs(abs(c[0]) - 1.0) <= tol
        if self.kind == "torus":
            return all(abs(abs(ci) - 1.0) <= tol for ci in c)
        if self.kind == "box":
            return all(abs(ci.imag) <= tol and lo - tol <= ci.real <= hi + tol
                       for ci, (lo, hi) in zip(c, self.intervals))
        return any(max(abs(a - b) for a, b in zip(c, p.coords)) <= tol
                   for p in self.points)

    def require(self, lam: ParameterPoint) -> None:
        if not self.contains(lam):
            raise DomainError(f"parameter {lam.coords!r} outside {self.kind} domain")

    def sample(self, rng: np.random.Generator) -> ParameterPoint:
        if self.kind == "singleton":
            return self.point
        if self.kind == "circle":
            return ParameterPoint((cmath.exp(2j * math.pi * rng.random()),))
        if self.kind == "torus":
            t1, t2 = rng.random(), rng.random()
            return ParameterPoint((cmath.exp(2j * math.pi * t1),
                                   cmath.exp(2j * math.pi * t2)))
        if self.kind == "box":
            vals = tuple(complex(lo + (hi - lo) * rng.random())
                         for lo, hi in self.intervals)
            return ParameterPoint(vals)
        return self.points[int(rng.integers(0, len(self.points)))]

    def coord_bounds(self) -> list[tuple[float, float, float, float]]:
        """Per coordinate (re_lo, re_hi, im_lo, im_hi) enclosing the domain."""
        if self.kind == "singleton":
            return [(c.real, c.real, c.imag, c.imag) for c in self.point.coords]
        if self.kind == "circle":
            return [(-1.0, 1.0, -1.0, 1.0)]
        if self.kind == "torus":
            return [(-1.0, 1.0, -1.0, 1.0)] * 2
        if self.kind == "box":
            return [(lo, hi, 0.0, 0.0) for lo, hi in self.intervals]
        res = []
        for j in range(self.dim):
            vals = [p.coords[j] for p in self.points]
            res.append((min(v.real for v in vals), max(v.real for v in vals),
                        min(v.imag for v in vals), max(v.imag for v in vals)))
        return res


@dataclass(frozen=True)
class AffineCoefficient:
    """const + sum_j (re_coeffs[j]*Re(lam_j) + im_coeffs[j]*Im(lam_j))."""

    const: complex = 0j
    re_coeffs: tuple[complex, ...] = ()
    im_coeffs: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "const", complex(self.const))
        object.__setattr__(self, "re_coeffs",
                           tuple(complex(c) for c in self.re_coeffs))
        object.__setattr__(self, "im_coeffs",
                           tuple(complex(c) for c in self.im_coeffs))

    def __call__(self, lam: ParameterPoint) -> complex:
        val = self.const
        for j, c in enumerate(self.re_coeffs):
            val += c * lam.coords[j].real
        for j, c in enumerate(self.im_coeffs):
            val += c * lam.coords[j].imag
        return val

    def is_constant(self) -> bool:
        return not any(self.re_coeffs) and not any(self.im_coeffs)

    def abs_lower_bound(self, domain: ParameterDomain) -> float:
        """Conservative min |value| over the domain (centered interval form)."""
        if domain.kind == "finite":
            return min(abs(self(p)) for p in domain.points)
        bounds = domain.coord_bounds()
        mid = ParameterPoint(tuple(
            complex((rl + rh) / 2.0, (il + ih) / 2.0) for rl, rh, il, ih in bounds))
        center = abs(self(mid))
        spread = 0.0
        for j, (rl, rh, il, ih) in enumerate(bounds):
            if j < len(self.re_coeffs):
                spread += abs(self.re_coeffs[j]) * (rh - rl) / 2.0
            if j < len(self.im_coeffs):
                spread += abs(self.im_coeffs[j]) * (ih - il) / 2.0
        return center - spread

    def abs_upper_bound(self, domain: ParameterDomain) -> float:
        if domain.kind == "finite":
            return max(abs(self(p)) for p in domain.points)
        bounds = domain.coord_bounds()
        mid = ParameterPoint(tuple(
            complex((rl + rh) / 2.0, (il + ih) / 2.0) for rl, rh, il, ih in bounds))
        center = abs(self(mid))
        spread = 0.0
        for j, (rl, rh, il, ih) in enumerate(bounds):
            if j < len(self.re_coeffs):
                spread += abs(self.re_coeffs[j]) * (rh - rl) / 2.0
            if j < len(self.im_coeffs):
                spread += abs(self.im_coeffs[j]) * (ih - il) / 2.0
        return center + spread

    def theta_gradient(self, lam: ParameterPoint, base_dim: int,
                       angular: bool) -> np.ndarray:
        """d(value)/d(theta_j) for angle coordinates, or d/d(u_j) for box."""
        grad = np.zeros(base_dim, dtype=np.complex128)
        for j in range(base_dim):
            g = 0j
            if angular:
                if j < len(self.re_coeffs):
                    g += self.re_coeffs[j] * (-2.0 * math.pi * lam.coords[j].imag)
                if j < len(self.im_coeffs):
                    g += self.im_coeffs[j] * (2.0 * math.pi * lam.coords[j].real)
            else:
                if j < len(self.re_coeffs):
                    g += self.re_coeffs[j]
            grad[j] = g
        return grad


_ONE = AffineCoefficient(const=1.0)


@dataclass(frozen=True)
class FactorSpec:
    """Coefficient maps of one factor: p(y) = y^deg + sum c_k(lam) y^k."""

    degree: int
    coeff_maps: tuple[AffineCoefficient, ...]
    a_map: AffineCoefficient

    def __post_init__(self):
        if self.degree < 2:
            raise FamilyError("factor degree must be >= 2")
        if len(self.coeff_maps) != self.degree:
            raise FamilyError(
                f"factor of degree {self.degree} needs {self.degree} coefficient"
                f" maps (c_0..c_{self.degree - 1}), got {len(self.coeff_maps)}")


@dataclass(frozen=True)
class HenonFamily:
    """A continuous family lam -> H_lam over a compact parameter domain."""

    domain: ParameterDomain
    factor_specs: tuple[FactorSpec, ...]
    builtin: Optional[str] = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.factor_specs:
            raise FamilyError("family needs at least one factor")
        for idx, spec in enumerate(self.factor_specs):
            lb = spec.a_map.abs_lower_bound(self.domain)
            if lb <= 0.0:
                raise FamilyError(
                    f"coefficient 'a' of factor {idx + 1} may vanish on the"
                    f" domain (interval lower bound {lb:.3g})")

    @property
    def degree(self) -> int:
        d = 1
        for spec in self.factor_specs:
            d *= spec.degree
        return d

    def at(self, lam: ParameterPoint) -> HenonComposite:
        self.domain.require(lam)
        factors = []
        for spec in self.factor_specs:
            coeffs = tuple(cm(lam) for cm in spec.coeff_maps) + (1.0 + 0j,)
            factors.append(HenonFactor(coeffs, spec.a_map(lam)))
        return HenonComposite(tuple(factors))

    def coeff_size_bound(self) -> float:
        """Upper bound of max_factor (1 + sum|c_i| + |a|) over the domain."""
        total = 0.0
        for spec in self.factor_specs:
            s = 1.0 + spec.a_map.abs_upper_bound(self.domain)
            for cm in spec.coeff_maps:
                s += cm.abs_upper_bound(self.domain)
            total = max(total, s)
        return total

    def min_abs_a_bound(self) -> float:
        return min(spec.a_map.abs_lower_bound(self.domain)
                   for spec in self.factor_specs)

    def is_constant(self) -> bool:
        if self.domain.kind == "singleton":
            return True
        return all(cm.is_constant() for spec in self.factor_specs
                   for cm in list(spec.coeff_maps) + [spec.a_map])


def family_at(family: HenonFamily, lam: ParameterPoint) -> HenonComposite:
    return family.at(lam)


# --- base dynamics -----------------------------------------------------------


def _angles_of(lam: ParameterPoint) -> np.ndarray:
    return np.array([(cmath.phase(c) / (2.0 * math.pi)) % 1.0
                     for c in lam.coords])


def _point_from_angles(theta: np.ndarray) -> ParameterPoint:
    return ParameterPoint(tuple(cmath.exp(2j * math.pi * (t % 1.0))
                                for t in theta))


@dataclass(frozen=True)
class BaseDynamics:
    """The base homeomorphism sigma of the skew product.

    Kinds: ``identity``; ``rotation`` by angle 2*pi*alpha on the circle;
    ``torus_auto`` given by an integer 2x2 matrix with determinant +-1 acting
    on angle coordinates; ``permutation`` of a finite domain.
    """

    kind: str
    alpha: float = 0.0
    matrix: tuple[tuple[int, int], tuple[int, int]] = ((1, 0), (0, 1))
    permutation: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("identity", "rotation", "torus_auto", "permutation"):
            raise ConfigError(f"unknown base dynamics kind {self.kind!r}")
        if self.kind == "torus_auto":
            m = self.matrix
            det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
            if det not in (1, -1):
                raise ConfigError("torus automorphism matrix must have det +-1")

    def check_domain(self, domain: ParameterDomain) -> None:
        need = {"identity": None, "rotation": "circle", "torus_auto": "torus",
                "permutation": "finite"}[self.kind]
        if need is not None and domain.kind != need:
            raise ConfigError(
                f"base dynamics {self.kind!r} needs a {need} domain,"
                f" got {domain.kind!r}")
        if self.kind == "permutation":
            if sorted(self.permutation) != list(range(len(domain.points))):
                raise ConfigError("permutation does not match the finite domain")

    def step(self, domain: ParameterDomain, lam: ParameterPoint) -> ParameterPoint:
        domain.require(lam)
        if self.kind == "identity":
            return lam
        if self.kind == "rotation":
            return ParameterPoint((cmath.exp(2j * math.pi * self.alpha) * lam.coords[0],))
        if self.kind == "torus_auto":
            th = _angles_of(lam)
            m = np.array(self.matrix, dtype=np.int64)
            return _point_from_angles(m @ th)
        idx = _finite_index(domain, lam)
        return domain.points[self.permutation[idx]]

    def inverse_step(self, domain: ParameterDomain,
                     lam: ParameterPoint) -> ParameterPoint:
        domain.require(lam)
        if self.kind == "identity":
            return lam
        if self.kind == "rotation":
            return ParameterPoint((cmath.exp(-2j * math.pi * self.alpha) * lam.coords[0],))
        if self.kind == "torus_auto":
            th = _angles_of(lam)
            m = np.array(self.matrix, dtype=np.int64)
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]],
                           dtype=np.int64) * det
            return _point_from_angles(inv @ th)
        idx = _finite_index(domain, lam)
        return domain.points[self.permutation.index(idx)]

    def iterate(self, domain: ParameterDomain, lam: ParameterPoint,
                n: int) -> ParameterPoint:
        stepper = self.step if n >= 0 else self.inverse_step
        for _ in range(abs(n)):
            lam = stepper(domain, lam)
        return lam

    @property
    def tangent_dim(self) -> int:
        return {"identity": 0, "rotation": 1, "torus_auto": 2,
                "permutation": 0}[self.kind]

    def tangent_matrix(self) -> np.ndarray:
        """Derivative in angle coordinates (constant for all builtin kinds)."""
        if self.kind == "rotation":
            return np.array([[1.0]])
        if self.kind == "torus_auto":
            return np.array(self.matrix, dtype=np.float64)
        return np.zeros((0, 0))

    def lyapunov_exponent(self) -> float:
        """Largest Lyapunov exponent of sigma (exact for the builtin kinds)."""
        if self.kind != "torus_auto":
            return 0.0
        eig = np.linalg.eigvals(np.array(self.matrix, dtype=np.float64))
        return float(np.log(np.max(np.abs(eig))))

    def is_mixing(self, domain: ParameterDomain) -> bool:
        """Whether sigma is mixing for the uniform measure (per builtin kind).

        Hyperbolic torus automorphisms are mixing; rotations are not; the
        identity and permutations are mixing only on a one-point domain.
        """
        if self.kind == "torus_auto":
            eig = np.abs(np.linalg.eigvals(np.array(self.matrix, dtype=float)))
            return bool(eig.max() > 1.0 + 1e-12)
        if self.kind == "identity":
            return domain.kind == "singleton" or (
                domain.kind == "finite" and len(domain.points) == 1)
        return False


def _finite_index(domain: ParameterDomain, lam: ParameterPoint) -> int:
    for i, p in enumerate(domain.points):
        if max(abs(a - b) for a, b in zip(p.coords, lam.coords)) <= _MEMBERSHIP_TOL:
            return i
    raise DomainError(f"{lam.coords!r} is not a point of the finite domain")


def sigma_step(base: BaseDynamics, domain: ParameterDomain,
               lam: ParameterPoint) -> ParameterPoint:
    return base.step(domain, lam)


def sigma_inverse_step(base: BaseDynamics, domain: ParameterDomain,
                       lam: ParameterPoint) -> ParameterPoint:
    return base.inverse_step(domain, lam)


# --- builtin families --------------------------------------------------------


def _const(v) -> AffineCoefficient:
    return AffineCoefficient(const=v)


def quadratic_singleton(c: complex = 0j, a: complex = 0.3) -> HenonFamily:
    """Single map (x, y) -> (y, y^2 + c - a*x)."""
    dom = ParameterDomain("singleton", point=ParameterPoint((0j,)))
    spec = FactorSpec(2, (_const(c), _const(0)), _const(a))
    return HenonFamily(dom, (spec,), builtin="quadratic-singleton")


def quadratic_circle(c0: complex = -1.2, c1: complex = 0.1,
                     a0: complex = 0.3) -> HenonFamily:
    """p_lam(y) = y^2 + c0 + c1*Re(lam), a(lam) = a0, lam on the unit circle."""
    dom = ParameterDomain("circle")
    spec = FactorSpec(2, (AffineCoefficient(const=c0, re_coeffs=(c1,)),
                          _const(0)), _const(a0))
    return HenonFamily(dom, (spec,), builtin="quadratic-circle")


def quadratic_torus(c0: complex = -1.1, c1: complex = 0.08,
                    c2: complex = 0.06, a0: complex = 0.3) -> HenonFamily:
    """p_lam(y) = y^2 + c0 + c1*Re(lam_1) + c2*Re(lam_2) over the torus."""
    dom = ParameterDomain("torus")
    spec = FactorSpec(2, (AffineCoefficient(const=c0, re_coeffs=(c1, c2)),
                          _const(0)), _const(a0))
    return HenonFamily(dom, (spec,), builtin="quadratic-torus")


def cubic_singleton(c: complex = 0.1j, a: complex = 0.2) -> HenonFamily:
    dom = ParameterDomain("singleton", point=ParameterPoint((0j,)))
    spec = FactorSpec(3, (_const(c), _const(0), _const(0)), _const(a))
    return HenonFamily(dom, (spec,), builtin="cubic-singleton")


def quad_cubic_singleton(c1: complex = -0.2, c2: complex = 0.1,
                         a1: complex = 0.3, a2: complex = 0.25) -> HenonFamily:
    """Two-factor composite of degree 6: y^2 + c1 then y^3 + c2."""
    dom = ParameterDomain("singleton", point=ParameterPoint((0j,)))
    s1 = FactorSpec(2, (_const(c1), _const(0)), _const(a1))
    s2 = FactorSpec(3, (_const(c2), _const(0), _const(0)), _const(a2))
    return HenonFamily(dom, (s1, s2), builtin="quad-cubic-singleton")


BUILTIN_FAMILIES = {
    "quadratic-singleton": quadratic_singleton,
    "quadratic-circle": quadratic_circle,
    "quadratic-torus": quadratic_torus,
    "cubic-singleton": cubic_singleton,
    "quad-cubic-singleton": quad_cubic_singleton,
}


def builtin_family(name: str, **params) -> HenonFamily:
    try:
        builder = BUILTIN_FAMILIES[name]
    except KeyError:
        raise ConfigError(f"unknown builtin family {name!r}; available:"
                          f" {sorted(BUILTIN_FAMILIES)}") from None
    return builder(**params)

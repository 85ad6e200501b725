"""Monte Carlo averaged Green functions over sequence space.

The integral over the infinite product space is sampled by finitely many
i.i.d. parameter sequences; each per-sequence estimate is truncated at its
certified depth, beyond which further entries provably change the value by
at most the tolerance, so sampling finite prefixes is exact to tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import (FiltrationData, get_filtration, green_estimate,
                     green_many, classify_many)
from .errors import ConfigError
from .maps import (HenonFamily, ParameterPoint, Point2, eval_composite,
                   eval_composite_inverse)
from .rng import AVERAGING, derive_seed, generator
from .sequences import iid_sequence


@dataclass(frozen=True)
class AvgGreenValue:
    """Mean of per-sequence Green estimates with both error sources.

    Total reported uncertainty = confidence multiple * mc_stderr +
    trunc_bound (the worst per-sequence certified truncation error).
    """

    mean: float
    mc_stderr: float
    trunc_bound: float
    n_sequences: int

    def uncertainty(self, sigmas: float = 3.0) -> float:
        return sigmas * self.mc_stderr + self.trunc_bound


@dataclass(frozen=True)
class SetVerdict:
    """Sampled verdict against the candidate core / hull sets."""

    verdict: str  # in_core | outside_hull | mixed
    n_escaped: int
    n_bounded: int
    n_sequences: int


@dataclass(frozen=True)
class InvarianceResidual:
    residual: float
    uncertainty: float
    lhs_mean: float
    rhs_mean: float


def _seq_seed(seed: int, branch: int, i: int) -> int:
    return derive_seed(seed, AVERAGING, branch, i)


def average_green(family: HenonFamily, sign: int, z: Point2,
                  n_sequences: int, tol: float, seed: int,
                  filt: FiltrationData | None = None) -> AvgGreenValue:
    """Mean of G^sign_Lambda(z) over i.i.d. sequence draws."""
    if n_sequences < 2:
        raise ConfigError("need at least 2 sequences")
    if filt is None:
        filt = get_filtration(family)
    vals = np.empty(n_sequences)
    truncs = np.empty(n_sequences)
    for i in range(n_sequences):
        seq = iid_sequence(family.domain, _seq_seed(seed, 0, i))
        g = green_estimate(family, seq, sign, z, tol, filt)
        vals[i] = g.value
        truncs[i] = g.err_bound
    stderr = float(vals.std(ddof=1) / math.sqrt(n_sequences))
    return AvgGreenValue(mean=float(vals.mean()), mc_stderr=stderr,
                         trunc_bound=float(truncs.max()),
                         n_sequences=n_sequences)


def average_green_many(family: HenonFamily, sign: int, xs: np.ndarray,
                       ys: np.ndarray, n_sequences: int, tol: float,
                       seed: int, filt: FiltrationData | None = None):
    """Per-point (mean, mc_stderr, trunc_bound) over sequence draws."""
    if n_sequences < 2:
        raise ConfigError("need at least 2 sequences")
    if filt is None:
        filt = get_filtration(family)
    acc = np.zeros(xs.shape[0])
    acc2 = np.zeros(xs.shape[0])
    trunc = np.zeros(xs.shape[0])
    for i in range(n_sequences):
        seq = iid_sequence(family.domain, _seq_seed(seed, 0, i))
        v, e, _, _ = green_many(family, seq, sign, xs, ys, tol, filt)
        acc += v
        acc2 += v * v
        trunc = np.maximum(trunc, e)
    mean = acc / n_sequences
    var = np.maximum(acc2 / n_sequences - mean ** 2, 0.0)
    stderr = np.sqrt(var / max(n_sequences - 1, 1))
    return mean, stderr, trunc


def eg_invariance_residual(family: HenonFamily, sign: int, z: Point2,
                           n_lambda: int, n_sequences: int, tol: float,
                           seed: int,
                           filt: FiltrationData | None = None) -> InvarianceResidual:
    """|MC average over lambda of EG(H_lambda^sign z) - d * EG(z)|.

    The uncertainty combines, at 3 sigma, the lambda-sampling spread, the
    per-estimate MC errors and the truncation bounds of both sides.
    """
    if n_lambda < 2:
        raise ConfigError("need at least 2 lambda samples")
    if filt is None:
        filt = get_filtration(family)
    d = family.degree
    rhs = average_green(family, sign, z, n_sequences, tol, seed, filt)
    rng = generator(seed, AVERAGING, 9)
    vals = np.empty(n_lambda)
    ses = np.empty(n_lambda)
    truncs = np.empty(n_lambda)
    for i in range(n_lambda):
        lam = family.domain.sample(rng)
        comp = family.at(lam)
        w = eval_composite(comp, z) if sign > 0 else eval_composite_inverse(comp, z)
        est = average_green(family, sign, w, n_sequences, tol,
                            derive_seed(seed, AVERAGING, 2, i), filt)
        vals[i] = est.mean
        ses[i] = est.mc_stderr
        truncs[i] = est.trunc_bound
    lhs_mean = float(vals.mean())
    lam_var = float(vals.var(ddof=1) / n_lambda)
    mc_var = float((ses ** 2).mean() / n_lambda)
    se_lhs = math.sqrt(lam_var + mc_var)
    residual = abs(lhs_mean - d * rhs.mean)
    uncertainty = (3.0 * math.hypot(se_lhs, d * rhs.mc_stderr)
                   + float(truncs.max()) + d * rhs.trunc_bound)
    return InvarianceResidual(residual=residual, uncertainty=uncertainty,
                              lhs_mean=lhs_mean, rhs_mean=rhs.mean)


def classify_against_hulls(family: HenonFamily, sign: int, z: Point2,
                           n_sequences: int, n_max: int, seed: int,
                           filt: FiltrationData | None = None) -> SetVerdict:
    """Aggregate escape classification over sampled sequences.

    All bounded -> candidate member of the common core (intersection of the
    non-escaping sets); all escaped -> candidate outside the closed union;
    otherwise mixed.  Sampling evidence only, never a certificate.
    """
    if filt is None:
        filt = get_filtration(family)
    n_esc = 0
    n_bdd = 0
    for i in range(n_sequences):
        seq = iid_sequence(family.domain, _seq_seed(seed, 1, i))
        cls = classify_many(family, seq, sign, np.array([z.x]),
                            np.array([z.y]), n_max, filt)[0]
        if cls.verdict == "escaped":
            n_esc += 1
        elif cls.verdict == "bounded":
            n_bdd += 1
    if n_bdd == n_sequences:
        verdict = "in_core"
    elif n_esc == n_sequences:
        verdict = "outside_hull"
    else:
        verdict = "mixed"
    return SetVerdict(verdict=verdict, n_escaped=n_esc, n_bounded=n_bdd,
                      n_sequences=n_sequences)

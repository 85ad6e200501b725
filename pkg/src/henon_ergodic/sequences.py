"""Parameter sequences Lambda = (lambda_1, lambda_2, ...) over a domain.

Modes: ``iid`` (counter-based RNG keyed by (seed, n), so term(n) is
random-access and thread-schedule independent), ``sigma_orbit`` (forward or
backward orbit of the base homeomorphism), ``constant`` and ``explicit``.
All modes support the shift Lambda_k = (lambda_k, lambda_{k+1}, ...) and the
prefix lam*Lambda = (lam, lambda_1, ...).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError
from .maps import (BaseDynamics, HenonFamily, ParameterDomain, ParameterPoint)
from .rng import SEQ_TERM, generator


class ParameterSequence:
    """Deterministic accessor term(n) -> lambda_n for n >= 1."""

    def __init__(self, domain: ParameterDomain):
        self.domain = domain

    def term(self, n: int) -> ParameterPoint:
        raise NotImplementedError

    def terms(self, n1: int, n2: int) -> list[ParameterPoint]:
        """Terms n1..n2 inclusive."""
        return [self.term(n) for n in range(n1, n2 + 1)]

    def shift(self, k: int) -> "ParameterSequence":
        """Lambda_k: drops the first k-1 terms (k=1 is the identity)."""
        if k < 1:
            raise ConfigError("shift index must be >= 1")
        if k == 1:
            return self
        return _Shifted(self, k)

    def prefix(self, lam: ParameterPoint) -> "ParameterSequence":
        """lam*Lambda: prepends one term."""
        self.domain.require(lam)
        return _Prefixed(self, lam)


class _Shifted(ParameterSequence):
    def __init__(self, parent: ParameterSequence, k: int):
        super().__init__(parent.domain)
        self.parent = parent
        self.k = k

    def term(self, n: int) -> ParameterPoint:
        return self.parent.term(n + self.k - 1)


class _Prefixed(ParameterSequence):
    def __init__(self, parent: ParameterSequence, lam: ParameterPoint):
        super().__init__(parent.domain)
        self.parent = parent
        self.lam = lam

    def term(self, n: int) -> ParameterPoint:
        if n < 1:
            raise ConfigError("sequence terms start at n = 1")
        if n == 1:
            return self.lam
        return self.parent.term(n - 1)


class IIDSequence(ParameterSequence):
    """i.i.d. draws from the domain's uniform measure, random-access by term."""

    def __init__(self, domain: ParameterDomain, seed: int):
        super().__init__(domain)
        self.seed = int(seed)

    def term(self, n: int) -> ParameterPoint:
        if n < 1:
            raise ConfigError("sequence terms start at n = 1")
        return self.domain.sample(generator(self.seed, SEQ_TERM, n))


class ConstantSequence(ParameterSequence):
    def __init__(self, domain: ParameterDomain, lam: ParameterPoint):
        super().__init__(domain)
        domain.require(lam)
        self.lam = lam

    def term(self, n: int) -> ParameterPoint:
        if n < 1:
            raise ConfigError("sequence terms start at n = 1")
        return self.lam


class ExplicitSequence(ParameterSequence):
    """A finite list of terms; asking past the end is an error."""

    def __init__(self, domain: ParameterDomain, terms: list[ParameterPoint]):
        super().__init__(domain)
        if not terms:
            raise ConfigError("explicit sequence needs at least one term")
        for lam in terms:
            domain.require(lam)
        self._terms = list(terms)

    def term(self, n: int) -> ParameterPoint:
        if n < 1:
            raise ConfigError("sequence terms start at n = 1")
        if n > len(self._terms):
            raise ConfigError(
                f"explicit sequence has {len(self._terms)} terms but term"
                f" {n} was requested; provide a longer list")
        return self._terms[n - 1]


class SigmaOrbitSequence(ParameterSequence):
    """Forward orbit (lam, sigma lam, ...) or backward (sigma^-1 lam, ...).

    The forward orbit starting at lam is the sequence realizing the fiber
    dynamics of the skew product over lam; the backward orbit realizes the
    inverse fiber dynamics.
    """

    def __init__(self, domain: ParameterDomain, base: BaseDynamics,
                 lam0: ParameterPoint, direction: str = "forward"):
        super().__init__(domain)
        if direction not in ("forward", "backward"):
            raise ConfigError("direction must be 'forward' or 'backward'")
        base.check_domain(domain)
        domain.require(lam0)
        self.base = base
        self.lam0 = lam0
        self.direction = direction
        self._cache = [lam0]

    def term(self, n: int) -> ParameterPoint:
        if n < 1:
            raise ConfigError("sequence terms start at n = 1")
        # forward: term(n) = sigma^{n-1}(lam0); backward: sigma^{-n}(lam0)
        idx = n - 1 if self.direction == "forward" else n
        while len(self._cache) <= idx:
            prev = self._cache[-1]
            if self.direction == "forward":
                self._cache.append(self.base.step(self.domain, prev))
            else:
                self._cache.append(self.base.inverse_step(self.domain, prev))
        return self._cache[idx]


def iid_sequence(domain: ParameterDomain, seed: int) -> ParameterSequence:
    return IIDSequence(domain, seed)


def constant_sequence(domain: ParameterDomain,
                      lam: ParameterPoint) -> ParameterSequence:
    return ConstantSequence(domain, lam)


def explicit_sequence(domain: ParameterDomain,
                      terms) -> ParameterSequence:
    return ExplicitSequence(domain, list(terms))


def sigma_orbit_sequence(domain: ParameterDomain, base: BaseDynamics,
                         lam0: ParameterPoint,
                         direction: str = "forward") -> ParameterSequence:
    return SigmaOrbitSequence(domain, base, lam0, direction)


def fiber_sequence(domain: ParameterDomain, base: BaseDynamics,
                   lam: ParameterPoint, sign: int) -> ParameterSequence:
    """Sequence realizing the fibered Green function over lam for sign +-1."""
    return SigmaOrbitSequence(domain, base, lam,
                              "forward" if sign > 0 else "backward")


def pack_steps(family: HenonFamily, seq: ParameterSequence, first_term: int,
               count: int):
    """Pack composites for terms first_term..first_term+count-1 into arrays.

    Returns (coeffs[count, m, maxdeg+1], degs[m], avals[count, m]) in the
    layout the kernels expect.
    """
    degs = np.array([spec.degree for spec in family.factor_specs],
                    dtype=np.int64)
    m = len(degs)
    width = int(degs.max()) + 1
    coeffs = np.zeros((count, m, width), dtype=np.complex128)
    avals = np.zeros((count, m), dtype=np.complex128)
    for t in range(count):
        comp = family.at(seq.term(first_term + t))
        for j, f in enumerate(comp.factors):
            coeffs[t, j, :degs[j] + 1] = f.poly_coeffs
            avals[t, j] = f.a
    return coeffs, degs, avals

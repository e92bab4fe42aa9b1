"""Warped factors phi(r) and their smallness constants.

The metric on the spatial slice is dr^2 + phi(r)^2 d(omega)^2.  Four closed
families are supported; derivatives are hand-coded so that downstream
admissibility functionals see exact phi, phi', phi'' rather than numerical
differentiation noise.

Families
--------
flat                 phi(r) = r
asymptotically_flat  phi(r) = r (1 + phi1(r)),  phi1 = eps r^a / (1+r^2)^(b/2)
sinh                 phi(r) = sinh r
polynomial           phi(r) = r + r^2 + ... + r^p
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, HypothesisViolationError, UnsupportedFamilyError
from .scan import DEFAULT_SCAN_POLICY, InfimumScanPolicy, scan_supremum

__all__ = ["Family", "MetricProfile", "ProfileConstants", "A2Verdict",
           "eval_phi", "profile_constants", "check_A2"]

_MAX_POLY_DEGREE = 20  # keeps phi^2 within double range on the scan grid
_MAX_AF_EXPONENT = 12
_SINH_LARGE = 30.0  # beyond this use exponential asymptotics


class Family(enum.Enum):
    FLAT = "flat"
    ASYMPTOTICALLY_FLAT = "asymptotically_flat"
    SINH = "sinh"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class MetricProfile:
    """Immutable description of one warped factor.

    ``epsilon``, ``alpha``, ``beta`` only apply to the asymptotically flat
    family, ``degree`` only to the polynomial one.  ``n`` is the spatial
    dimension of the warped product.
    """

    family: Family
    n: int = 3
    epsilon: float = 0.0
    alpha: int = 1
    beta: int = 1
    degree: int = 2

    def __post_init__(self):
        if self.n < 3:
            raise ConfigurationError(f"dimension n must be >= 3, got {self.n}")
        if self.family is Family.ASYMPTOTICALLY_FLAT:
            if self.epsilon < 0:
                raise ConfigurationError("amplitude epsilon must be >= 0")
            if not (1 <= self.alpha <= self.beta):
                raise ConfigurationError(
                    f"exponents must satisfy 1 <= alpha <= beta, got "
                    f"alpha={self.alpha}, beta={self.beta}")
            if self.beta > _MAX_AF_EXPONENT:
                raise ConfigurationError(f"beta must be <= {_MAX_AF_EXPONENT}")
        if self.family is Family.POLYNOMIAL and not (2 <= self.degree <= _MAX_POLY_DEGREE):
            raise ConfigurationError(
                f"polynomial degree must be in [2, {_MAX_POLY_DEGREE}], got {self.degree}")

    # -- phi1 decomposition (flat / asymptotically flat only) ---------------

    @property
    def has_phi1(self) -> bool:
        return self.family in (Family.FLAT, Family.ASYMPTOTICALLY_FLAT)

    def phi1_parts(self, r):
        """(phi1, r phi1', r^2 phi1'') evaluated elementwise, r >= 0."""
        r = np.asarray(r, dtype=float)
        if self.family is Family.FLAT:
            z = np.zeros_like(r)
            return z, z.copy(), z.copy()
        if self.family is not Family.ASYMPTOTICALLY_FLAT:
            raise UnsupportedFamilyError(
                f"{self.family.value} profile has no phi1 decomposition")
        eps, a, b = self.epsilon, self.alpha, self.beta
        w = 1.0 + r * r
        phi1 = eps * r**a * w ** (-b / 2.0)
        # r phi1' = eps r^a w^(-b/2-1) (a + (a-b) r^2)
        s = a + (a - b) * r * r
        rp = eps * r**a * w ** (-b / 2.0 - 1.0) * s
        # r^2 phi1'' assembled from the product rule; the (a-1) term vanishes
        # identically for a = 1 and would hit r^(a-2) at r = 0 otherwise.
        t2 = -(b + 2.0) * eps * r ** (a + 2) * w ** (-b / 2.0 - 2.0) * s
        t3 = 2.0 * (a - b) * eps * r ** (a + 2) * w ** (-b / 2.0 - 1.0)
        if a == 1:
            rpp = t2 + t3
        else:
            rpp = (a - 1.0) * eps * r**a * w ** (-b / 2.0 - 1.0) * s + t2 + t3
        return phi1, rp, rpp

    def phi1_limit_at_infinity(self) -> float:
        """lim phi1(r) as r -> infinity (0 for flat, eps when alpha == beta)."""
        if self.family is Family.FLAT:
            return 0.0
        if self.family is Family.ASYMPTOTICALLY_FLAT:
            return self.epsilon if self.alpha == self.beta else 0.0
        raise UnsupportedFamilyError(
            f"{self.family.value} profile has no phi1 decomposition")

    # -- direct evaluation ---------------------------------------------------

    def phi_dphi_d2phi(self, r):
        """(phi, phi', phi'') elementwise; exact limits at r = 0."""
        r = np.asarray(r, dtype=float)
        if self.family is Family.FLAT:
            return r.copy(), np.ones_like(r), np.zeros_like(r)
        if self.family is Family.SINH:
            return np.sinh(r), np.cosh(r), np.sinh(r)
        if self.family is Family.POLYNOMIAL:
            p = self.degree
            ks = np.arange(1, p + 1)
            phi = sum(r**k for k in ks)
            dphi = sum(k * r ** (k - 1) for k in ks)
            d2phi = sum(k * (k - 1) * r ** (k - 2) for k in ks if k >= 2)
            return phi, dphi, d2phi
        phi1, rp, rpp = self.phi1_parts(r)
        phi = r * (1.0 + phi1)
        dphi = 1.0 + phi1 + rp
        with np.errstate(divide="ignore", invalid="ignore"):
            d2phi = np.where(r > 0.0, (2.0 * rp + rpp) / np.where(r > 0.0, r, 1.0), 0.0)
        # phi''(0) = 2 phi1'(0), nonzero only for alpha == 1
        if self.alpha == 1:
            d2phi = np.where(r == 0.0, 2.0 * self.epsilon, d2phi)
        return phi, dphi, d2phi

    def ratios(self, r):
        """Stable ratios (r/phi, r phi'/phi, r^3 phi''/phi^2) for r > 0.

        These stay finite across the whole scan grid even where phi itself
        overflows (sinh beyond r ~ 710).
        """
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise ValueError("ratios need r > 0; use the analytic limits at 0")
        if self.family is Family.FLAT:
            one = np.ones_like(r)
            return one, one.copy(), np.zeros_like(r)
        if self.family is Family.SINH:
            s1 = np.empty_like(r)
            s3 = np.empty_like(r)
            small = r <= _SINH_LARGE
            rs = r[small]
            s1[small] = rs / np.sinh(rs)
            s3[small] = rs**3 / np.sinh(rs)
            rl = r[~small]
            s1[~small] = 2.0 * rl * np.exp(-rl)
            s3[~small] = 2.0 * rl**3 * np.exp(-rl)
            s2 = r / np.tanh(r)
            return s1, s2, s3
        if self.family is Family.POLYNOMIAL:
            p = self.degree
            g = sum(r**k for k in range(p))            # phi / r
            dphi = sum(k * r ** (k - 1) for k in range(1, p + 1))
            rpp = sum(k * (k - 1) * r ** (k - 1) for k in range(2, p + 1))  # r phi''
            return 1.0 / g, dphi / g, rpp / g**2
        phi1, rp, rpp = self.phi1_parts(r)
        den = 1.0 + phi1
        s1 = 1.0 / den
        s2 = 1.0 + rp / den
        s3 = (2.0 * rp + rpp) / den**2
        return s1, s2, s3

    def ratios_at_infinity(self) -> Optional[tuple]:
        """Limits of :meth:`ratios` at r -> infinity, or None if not finite.

        sinh and polynomial growth drive all three ratios to 0; for the
        flat / asymptotically flat families the limits follow from the
        phi1 limit L: (1/(1+L), 1, 0).
        """
        if self.family in (Family.SINH, Family.POLYNOMIAL):
            return 0.0, 0.0, 0.0
        lim = self.phi1_limit_at_infinity()
        return 1.0 / (1.0 + lim), 1.0, 0.0


@dataclass(frozen=True)
class ProfileConstants:
    """Smallness constants of the phi1 decomposition.

    a_phi  = sup |phi1 + r phi1'|
    b_phi  = sup |r phi1' + (1+phi1)(phi1 + r phi1')|
             + sup |2 r^2 (phi1')^2 + (1+phi1) r^2 phi1''|
    c_phi  = sup |sigma'/sigma| = sup |phi1' / (1+phi1)|
    """

    a_phi: float
    b_phi: float
    c_phi: float
    arg_a: float = 0.0
    arg_b1: float = 0.0
    arg_b2: float = 0.0


@dataclass(frozen=True)
class A2Verdict:
    passed: bool
    threshold: float
    achieved: float
    mu0: float
    constants: ProfileConstants


def eval_phi(profile: MetricProfile, r):
    """(phi(r), phi'(r), phi''(r)); accepts scalars or arrays, r >= 0."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0):
        raise ConfigurationError("radius must be nonnegative")
    phi, dphi, d2phi = profile.phi_dphi_d2phi(arr)
    if np.isscalar(r) or arr.ndim == 0:
        return float(phi), float(dphi), float(d2phi)
    return phi, dphi, d2phi


def profile_constants(profile: MetricProfile,
                      scan: InfimumScanPolicy = DEFAULT_SCAN_POLICY) -> ProfileConstants:
    """Scan the A_phi, B_phi, c_phi suprema for a flat / asymptotically flat profile."""
    if not profile.has_phi1:
        raise UnsupportedFamilyError(
            f"constants A_phi/B_phi need a phi1 decomposition; "
            f"family {profile.family.value} has none")
    if profile.family is Family.FLAT or profile.epsilon == 0.0:
        return ProfileConstants(0.0, 0.0, 0.0)

    lim = profile.phi1_limit_at_infinity()

    def f_a(r):
        phi1, rp, _ = profile.phi1_parts(r)
        return np.abs(phi1 + rp)

    def f_b1(r):
        phi1, rp, _ = profile.phi1_parts(r)
        return np.abs(rp + (1.0 + phi1) * (phi1 + rp))

    def f_b2(r):
        phi1, rp, rpp = profile.phi1_parts(r)
        return np.abs(2.0 * rp**2 + (1.0 + phi1) * rpp)

    def f_c(r):
        phi1, rp, _ = profile.phi1_parts(r)
        return np.abs(rp / r) / (1.0 + phi1)

    sup_a = scan_supremum(f_a, scan, limit_at_zero=0.0, limit_at_infinity=abs(lim))
    sup_b1 = scan_supremum(f_b1, scan, limit_at_zero=0.0,
                           limit_at_infinity=abs((1.0 + lim) * lim))
    sup_b2 = scan_supremum(f_b2, scan, limit_at_zero=0.0, limit_at_infinity=0.0)
    c_zero = profile.epsilon if profile.alpha == 1 else 0.0
    sup_c = scan_supremum(f_c, scan, limit_at_zero=c_zero, limit_at_infinity=0.0)
    return ProfileConstants(
        a_phi=sup_a.value,
        b_phi=sup_b1.value + sup_b2.value,
        c_phi=sup_c.value,
        arg_a=sup_a.arg_r,
        arg_b1=sup_b1.arg_r,
        arg_b2=sup_b2.arg_r,
    )


def check_A2(profile: MetricProfile, mu0: float,
             scan: InfimumScanPolicy = DEFAULT_SCAN_POLICY) -> A2Verdict:
    """Smallness test: max(A_phi, B_phi) against the mu0-dependent threshold.

    The bound is 1 for mu0 >= 2 (inclusive) and the strict bound
    min(1/4 + mu0^2 - mu0, 1/8) otherwise.
    """
    if not mu0 > 0.5:
        raise HypothesisViolationError(
            f"spectral gap hypothesis needs mu0 > 1/2, got {mu0}")
    consts = profile_constants(profile, scan)
    achieved = max(consts.a_phi, consts.b_phi)
    if mu0 >= 2.0:
        threshold = 1.0
        passed = achieved <= threshold
    else:
        threshold = min(0.25 + mu0 * mu0 - mu0, 0.125)
        passed = achieved < threshold
    return A2Verdict(passed=passed, threshold=threshold, achieved=achieved,
                     mu0=mu0, constants=consts)

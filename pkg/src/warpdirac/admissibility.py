"""Mode potentials and the delta functionals gating the global estimates.

For an angular eigenvalue mu the radial reduction carries the potential
V = mu / phi.  Two derived quantities drive everything here:

* the Hardy-form infima

      delta_pm = min[ 1/4,
                      inf 1/4 + r^2 (V^2 +- V'),
                      inf 1/4 - r^3 (2VV' +- V'') - r^2 (V^2 +- V') ]

* the quadratic-weight variant built from W = V^2 - V' = mu (mu + phi')/phi^2

      delta_phi(mu) = min( 1, inf 4 r^2 W + 1, inf -4 r^2 W - 4 r^3 W' + 1 )

The two are tied by the algebraic identity 4 r^2 W + 1 = 4 (1/4 + r^2 (V^2 - V'))
which is kept as a permanent regression test.  All infima are evaluated in
overflow-safe scaled variables (r V, r^2 V', r^3 V'', r^3 W') so the scan
grid can span [1e-6, 1e6] for every family including sinh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .profiles import MetricProfile, ProfileConstants
from .scan import DEFAULT_SCAN_POLICY, InfimumScanPolicy, scan_infimum, scan_supremum

__all__ = ["ModePotential", "TermInfimum", "DeltaPair", "DeltaPhi", "DeltaC",
           "AdmissibilityReport", "delta_pm", "delta_phi", "delta_c",
           "check_admissible", "delta_lower_bound"]

# points probing decay of the potential toward infinity
_DECAY_PROBES = (1e4, 1e5, 1e6)
_DECAY_TOL = 1e-6


@dataclass(frozen=True)
class ModePotential:
    """V = mu/phi together with its first two derivatives.

    The channel potentials are c_pm = -(n-1)(n-3)/(4 r^2) + V^2 +- V'.
    """

    profile: MetricProfile
    mu: float
    n: int = 3

    def __post_init__(self):
        if self.mu == 0.0:
            raise ConfigurationError("angular eigenvalue mu must be nonzero")
        if self.n < 3:
            raise ConfigurationError(f"dimension n must be >= 3, got {self.n}")

    # direct values, fine for moderate r (operator assembly on a grid)
    def V(self, r):
        phi, _, _ = self.profile.phi_dphi_d2phi(np.asarray(r, dtype=float))
        return self.mu / phi

    def V_prime(self, r):
        phi, dphi, _ = self.profile.phi_dphi_d2phi(np.asarray(r, dtype=float))
        return -self.mu * dphi / phi**2

    def V_second(self, r):
        phi, dphi, d2phi = self.profile.phi_dphi_d2phi(np.asarray(r, dtype=float))
        return self.mu * (2.0 * dphi**2 / phi**3 - d2phi / phi**2)

    def c_channel(self, r, sign: int):
        """c_+ (sign=+1) or c_- (sign=-1) at radii r > 0."""
        r = np.asarray(r, dtype=float)
        v, vp = self.V(r), self.V_prime(r)
        return -((self.n - 1) * (self.n - 3)) / (4.0 * r**2) + v**2 + sign * vp

    def c_channel_prime(self, r, sign: int):
        r = np.asarray(r, dtype=float)
        v, vp, vpp = self.V(r), self.V_prime(r), self.V_second(r)
        return ((self.n - 1) * (self.n - 3)) / (2.0 * r**3) + 2.0 * v * vp + sign * vpp

    # scaled, overflow-safe combinations used by the scans
    def scaled_parts(self, r):
        """(rV, r^2 V', r^3 V'', r^3 W') with W = mu (mu + phi')/phi^2, r > 0."""
        s1, s2, s3 = self.profile.ratios(r)
        mu = self.mu
        rv = mu * s1
        r2vp = -mu * s1 * s2
        r3vpp = 2.0 * mu * s1 * s2**2 - mu * s3
        r3wp = mu * s3 - 2.0 * rv**2 * s2 - 2.0 * mu * s1 * s2**2
        return rv, r2vp, r3vpp, r3wp

    def scaled_parts_at_zero(self):
        """Limits of scaled_parts as r -> 0+ (phi(0)=0, phi'(0)=1)."""
        mu = self.mu
        return mu, -mu, 2.0 * mu, -2.0 * mu * (mu + 1.0)

    def scaled_parts_at_infinity(self) -> Optional[tuple]:
        lims = self.profile.ratios_at_infinity()
        if lims is None:
            return None
        s1, s2, s3 = lims
        mu = self.mu
        rv = mu * s1
        return (rv, -mu * s1 * s2,
                2.0 * mu * s1 * s2**2 - mu * s3,
                mu * s3 - 2.0 * rv**2 * s2 - 2.0 * mu * s1 * s2**2)


def _term_I(parts, sign: int):
    rv, r2vp, _, _ = parts
    return 0.25 + rv**2 + sign * r2vp


def _term_Q(parts, sign: int):
    rv, r2vp, r3vpp, _ = parts
    return 0.25 - (2.0 * rv * r2vp + sign * r3vpp) - (rv**2 + sign * r2vp)


def _term_quad(parts):
    rv, r2vp, _, _ = parts
    return 4.0 * (rv**2 - r2vp) + 1.0


def _term_cubic(parts):
    rv, r2vp, _, r3wp = parts
    return -4.0 * (rv**2 - r2vp) - 4.0 * r3wp + 1.0


@dataclass(frozen=True)
class TermInfimum:
    value: float
    arg_r: float


def _scan_term(pot: ModePotential, term, sign: Optional[int],
               scan: InfimumScanPolicy) -> TermInfimum:
    zero = pot.scaled_parts_at_zero()
    inf_parts = pot.scaled_parts_at_infinity()
    if sign is None:
        f = lambda r: term(pot.scaled_parts(r))
        lim0, liminf = term(zero), (None if inf_parts is None else term(inf_parts))
    else:
        f = lambda r: term(pot.scaled_parts(r), sign)
        lim0 = term(zero, sign)
        liminf = None if inf_parts is None else term(inf_parts, sign)
    res = scan_infimum(f, scan, limit_at_zero=lim0, limit_at_infinity=liminf)
    return TermInfimum(res.value, res.arg_r)


@dataclass(frozen=True)
class DeltaPair:
    """delta_+ and delta_- with the per-term infima that produced them."""

    delta_plus: float
    delta_minus: float
    plus_quadratic: TermInfimum
    plus_cubic: TermInfimum
    minus_quadratic: TermInfimum
    minus_cubic: TermInfimum


@dataclass(frozen=True)
class DeltaPhi:
    value: float
    quad_term: TermInfimum
    cubic_term: TermInfimum

    def violating_term(self) -> Optional[TermInfimum]:
        """First non-positive term (quadratic checked before cubic), if any."""
        if self.value > 0.0:
            return None
        for term in (self.quad_term, self.cubic_term):
            if term.value <= 0.0:
                return term
        return None  # pragma: no cover


@dataclass(frozen=True)
class DeltaC:
    value: float
    quad_term: TermInfimum
    cubic_term: TermInfimum


def delta_pm(pot: ModePotential,
             scan: InfimumScanPolicy = DEFAULT_SCAN_POLICY) -> DeltaPair:
    """Both Hardy-form infima for the +/- channels of one mode."""
    pq = _scan_term(pot, _term_I, +1, scan)
    pc = _scan_term(pot, _term_Q, +1, scan)
    mq = _scan_term(pot, _term_I, -1, scan)
    mc = _scan_term(pot, _term_Q, -1, scan)
    return DeltaPair(
        delta_plus=min(0.25, pq.value, pc.value),
        delta_minus=min(0.25, mq.value, mc.value),
        plus_quadratic=pq, plus_cubic=pc,
        minus_quadratic=mq, minus_cubic=mc,
    )


def delta_phi(profile: MetricProfile, mu: float,
              scan: InfimumScanPolicy = DEFAULT_SCAN_POLICY) -> DeltaPhi:
    """Quadratic-weight variant built on W = mu (mu + phi')/phi^2."""
    pot = ModePotential(profile=profile, mu=mu, n=profile.n)
    quad = _scan_term(pot, _term_quad, None, scan)
    cubic = _scan_term(pot, _term_cubic, None, scan)
    return DeltaPhi(value=min(1.0, quad.value, cubic.value),
                    quad_term=quad, cubic_term=cubic)


def delta_c(pot: ModePotential, sign: int,
            scan: InfimumScanPolicy = DEFAULT_SCAN_POLICY) -> DeltaC:
    """Generic channel functional min[1/4, inf(c r^2 + (n-2)^2/4), inf(-r^3 c' - r^2 c + (n-2)^2/4)].

    Evaluated directly from the c_{+-} channel of ``pot``; agreement with
    :func:`delta_pm` is an invariant, not an implementation shortcut.
    """
    if sign not in (+1, -1):
        raise ConfigurationError("sign must be +1 or -1")
    n = pot.n
    shift = (n - 2) ** 2 / 4.0
    corner = (n - 1) * (n - 3) / 4.0

    def r2c(parts):
        rv, r2vp, _, _ = parts
        return -corner + rv**2 + sign * r2vp

    def term2(parts):
        return r2c(parts) + shift

    def term3(parts):
        rv, r2vp, r3vpp, _ = parts
        r3cp = 2.0 * corner + 2.0 * rv * r2vp + sign * r3vpp
        return -r3cp - r2c(parts) + shift

    quad = _scan_term(pot, term2, None, scan)
    cubic = _scan_term(pot, term3, None, scan)
    return DeltaC(value=min(0.25, quad.value, cubic.value),
                  quad_term=quad, cubic_term=cubic)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the full sufficient-condition check for one mode."""

    mu: float
    family: str
    n: int
    delta_plus: float
    delta_minus: float
    delta_phi_mu: float
    delta_phi_neg_mu: float
    sup_4r2V: float
    limit_at_infinity_ok: bool
    admissible: bool
    witness_r: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "family": self.family,
            "n": self.n,
            "delta_plus": self.delta_plus,
            "delta_minus": self.delta_minus,
            "delta_phi_mu": self.delta_phi_mu,
            "delta_phi_neg_mu": self.delta_phi_neg_mu,
            "sup_4r2V": self.sup_4r2V,
            "limit_at_infinity_ok": self.limit_at_infinity_ok,
            "admissible": self.admissible,
            "witness_r": self.witness_r,
        }


def _r2w(pot: ModePotential, r):
    """r^2 W with W = mu (mu + phi')/phi^2, in overflow-safe variables."""
    rv, r2vp, _, _ = pot.scaled_parts(r)
    return rv**2 - r2vp


def _potential_decays(pot: ModePotential) -> bool:
    """Surrogate for lim_{r->inf} W = 0: monotone decay below 1e-6 at probes."""
    vals = []
    for r in _DECAY_PROBES:
        rv, r2vp, _, _ = pot.scaled_parts(np.array([r]))
        vals.append(abs(float(rv[0] ** 2 - r2vp[0])) / r**2)
    return vals[0] >= vals[1] >= vals[2] and vals[2] < _DECAY_TOL


def check_admissible(profile: MetricProfile, mu: float,
                     scan: InfimumScanPolicy = DEFAULT_SCAN_POLICY) -> AdmissibilityReport:
    """Full sufficient-condition report for one angular eigenvalue."""
    pot = ModePotential(profile=profile, mu=mu, n=profile.n)
    pair = delta_pm(pot, scan)
    dphi_pos = delta_phi(profile, mu, scan)
    dphi_neg = delta_phi(profile, -mu, scan)

    zero = pot.scaled_parts_at_zero()
    infp = pot.scaled_parts_at_infinity()
    sup = scan_supremum(
        lambda r: np.abs(4.0 * _r2w(pot, r)),
        scan,
        limit_at_zero=abs(4.0 * (zero[0] ** 2 - zero[1])),
        limit_at_infinity=None if infp is None else abs(4.0 * (infp[0] ** 2 - infp[1])),
    )
    sup_finite = not sup.diverging and math.isfinite(sup.value)
    decay_ok = _potential_decays(pot)
    admissible = (dphi_pos.value > 0.0 and dphi_neg.value > 0.0
                  and sup_finite and decay_ok)

    witness = None
    if not admissible:
        for d in (dphi_pos, dphi_neg):
            t = d.violating_term()
            if t is not None:
                witness = t.arg_r
                break
        if witness is None and not sup_finite:
            witness = sup.arg_r

    return AdmissibilityReport(
        mu=mu, family=profile.family.value, n=profile.n,
        delta_plus=pair.delta_plus, delta_minus=pair.delta_minus,
        delta_phi_mu=dphi_pos.value, delta_phi_neg_mu=dphi_neg.value,
        sup_4r2V=sup.value, limit_at_infinity_ok=decay_ok,
        admissible=admissible, witness_r=witness,
    )


def delta_lower_bound(constants: ProfileConstants, mu0: float) -> float:
    """Guaranteed lower bound for delta_pm over all modes with |mu| >= mu0.

    1/4 when mu0 >= 2, otherwise min(1/4 + mu0^2 - mu0, 1/8) - max(A_phi, B_phi).
    """
    if not mu0 > 0.5:
        raise ConfigurationError(f"lower bound needs mu0 > 1/2, got {mu0}")
    if mu0 >= 2.0:
        return 0.25
    return min(0.25 + mu0 * mu0 - mu0, 0.125) - max(constants.a_phi, constants.b_phi)

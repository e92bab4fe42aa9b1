"""Space-time norms, admissible exponents, and growth-in-mu scans.

Fractional Sobolev norms are defined once and for all through the flat
flattened reference operator: ||(1 + H0)^(s/2) v||, with H0 the discrete
flat radial Laplacian.  Strichartz norms weight the state pointwise by
(phi/r)^((n-1)/2 (1 - 2/q)) before the fractional power, take l^q(dr) in
space and L^p (trapezoid over the causal window) in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .admissibility import check_admissible
from .errors import ConfigurationError, ContractViolationError, NonAdmissibleError, PolicyError
from .evolution import SpinorState, SpinorTrajectory, evolve, gaussian_state
from .operators import RadialGrid, assemble_dirac, flat_reference_operator
from .profiles import MetricProfile
from .spectrum import ModeIndex

__all__ = ["ExponentTriple", "is_admissible_triple", "SobolevCalculus",
           "h_sobolev_norm", "smoothing_norm", "strichartz_norm", "h_ab_norm",
           "DataTemplate", "ModeScanRow", "NormScanResult", "mu_scan",
           "mixed_regularity_aggregate", "DEFAULT_EPSILON_LOSS", "SLOPE_SLACK",
           "SMOOTHING_SLOPE_LIMIT"]

DEFAULT_EPSILON_LOSS = 0.1
SLOPE_SLACK = 0.25
SMOOTHING_SLOPE_LIMIT = 0.5 + SLOPE_SLACK
_SCALING_TOL = 1e-12


def is_admissible_triple(p: float, q: float, m: float, n: int) -> bool:
    """Wave (m = 0) or Klein-Gordon (m != 0) scaling admissibility."""
    if p < 2.0 or q < 2.0:
        return False
    if m == 0.0:
        if not math.isfinite(q):
            return False
        lhs = (0.0 if math.isinf(p) else 2.0 / p) + (n - 1) / q
        return abs(lhs - (n - 1) / 2.0) <= _SCALING_TOL
    lhs = (0.0 if math.isinf(p) else 2.0 / p) + (0.0 if math.isinf(q) else n / q)
    return abs(lhs - n / 2.0) <= _SCALING_TOL


@dataclass(frozen=True)
class ExponentTriple:
    """Admissible (p, q, m) with the derived regularity s = 1/q - 1/p."""

    p: float
    q: float
    m: float = 0.0

    @property
    def s(self) -> float:
        return 1.0 / self.q - (0.0 if math.isinf(self.p) else 1.0 / self.p)

    def require_admissible(self, n: int):
        if not is_admissible_triple(self.p, self.q, self.m, n):
            raise ContractViolationError(
                f"triple (p={self.p}, q={self.q}, m={self.m}) is not admissible in n={n}")


class SobolevCalculus:
    """Fractional calculus of (1 + H0) on one grid, eigenbasis cached."""

    _cache: dict = {}

    def __init__(self, grid: RadialGrid, n: int):
        self.grid, self.n = grid, n
        key = (grid.r_max, grid.n_cells, n)
        if key not in SobolevCalculus._cache:
            h0 = flat_reference_operator(n, grid)
            SobolevCalculus._cache[key] = h0.eigh()
        self._w, self._u = SobolevCalculus._cache[key]

    def apply(self, v: np.ndarray, s: float) -> np.ndarray:
        """(1 + H0)^(s/2) v by spectral calculus."""
        powers = np.maximum(1.0 + self._w, 0.0) ** (s / 2.0)
        return self._u @ (powers * (self._u.T @ v))

    def norm(self, state: SpinorState, s: float) -> float:
        gp = self.apply(state.plus, s)
        gm = self.apply(state.minus, s)
        return float(np.sqrt(state.grid.dr
                             * (np.sum(np.abs(gp) ** 2) + np.sum(np.abs(gm) ** 2))))


def h_sobolev_norm(state: SpinorState, exponent: float, n: int = 3) -> float:
    """H^s norm of a flattened state, |s| <= 1, via the flat reference operator."""
    if not -1.0 <= exponent <= 1.0:
        raise ContractViolationError(f"Sobolev exponent must be in [-1, 1], got {exponent}")
    return SobolevCalculus(state.grid, n).norm(state, exponent)


def _time_weights(times: np.ndarray) -> np.ndarray:
    """Trapezoid weights for the sampled window."""
    w = np.zeros_like(times)
    d = np.diff(times)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def smoothing_norm(traj: SpinorTrajectory, window: tuple[float, float]) -> float:
    """Space-time L^2 of r^-1 u over the window, flattened measure dr."""
    t0, t1 = window
    if t1 <= t0:
        raise ConfigurationError("window must have positive length")
    if traj.causal_t_max is not None and (abs(t0) > traj.causal_t_max + 1e-9
                                          or abs(t1) > traj.causal_t_max + 1e-9):
        raise PolicyError(
            f"window [{t0}, {t1}] exceeds the causal limit {traj.causal_t_max:g}")
    mask = (traj.times >= t0 - 1e-12) & (traj.times <= t1 + 1e-12)
    if np.count_nonzero(mask) < 2:
        raise ConfigurationError("window must contain at least two samples")
    times = traj.times[mask]
    r = traj.grid.nodes
    dr = traj.grid.dr
    densities = []
    for state, keep in zip(traj.states, mask):
        if not keep:
            continue
        densities.append(dr * float(np.sum((np.abs(state.plus) ** 2
                                            + np.abs(state.minus) ** 2) / r**2)))
    return float(np.sqrt(np.sum(_time_weights(times) * np.asarray(densities))))


def strichartz_weight(profile: MetricProfile, r: np.ndarray, n: int, q: float) -> np.ndarray:
    """(phi/r)^((n-1)/2 (1 - 2/q)) evaluated on the grid."""
    phi, _, _ = profile.phi_dphi_d2phi(r)
    return (phi / r) ** (0.5 * (n - 1) * (1.0 - 2.0 / q))


def strichartz_norm(traj: SpinorTrajectory, triple: ExponentTriple,
                    profile: Optional[MetricProfile] = None) -> float:
    """Weighted L^p_t W^(s,q) norm of a trajectory, s = 1/q - 1/p."""
    profile = profile or traj.profile
    triple.require_admissible(traj.n)
    s = triple.s
    q = triple.q
    r = traj.grid.nodes
    dr = traj.grid.dr
    weight = strichartz_weight(profile, r, traj.n, q)
    calc = SobolevCalculus(traj.grid, traj.n)
    spatial = np.empty(len(traj.times))
    for k, state in enumerate(traj.states):
        gp = calc.apply(weight * state.plus, s)
        gm = calc.apply(weight * state.minus, s)
        mag = np.sqrt(np.abs(gp) ** 2 + np.abs(gm) ** 2)
        spatial[k] = (dr * np.sum(mag**q)) ** (1.0 / q)
    if math.isinf(triple.p):
        return float(np.max(spatial))
    return float(np.sum(_time_weights(traj.times) * spatial**triple.p)
                 ** (1.0 / triple.p))


def h_ab_norm(mode_states: Sequence[tuple[ModeIndex, SpinorState]],
              a: float, b: float, n: int = 3) -> float:
    """Mixed radial/angular norm (sum over orthogonal modes).

    Per mode: ||.||_{H^a}^2 plus, for b != 0, the angular term
    lam^b ||component||^2 with lam = l (l + n - 2) at the component degree.
    b = 0 reduces to the plain H^a norm.
    """
    if not -1.0 <= a <= 1.0:
        raise ContractViolationError(f"radial exponent a must be in [-1, 1], got {a}")
    total = 0.0
    for mode, state in mode_states:
        if mode.degree_plus is None or mode.degree_minus is None:
            raise ConfigurationError(f"mode mu={mode.mu} lacks degree metadata")
        total += h_sobolev_norm(state, a, n=n) ** 2
        if b != 0.0:
            lam_p = float(mode.angular_laplace_eigenvalue("+"))
            lam_m = float(mode.angular_laplace_eigenvalue("-"))
            dr = state.grid.dr
            total += (lam_p**b) * dr * float(np.sum(np.abs(state.plus) ** 2))
            total += (lam_m**b) * dr * float(np.sum(np.abs(state.minus) ** 2))
    return float(np.sqrt(total))


@dataclass(frozen=True)
class DataTemplate:
    """Shared radial initial data used across a mu scan."""

    center: float = 12.0
    width: float = 1.5
    amplitude: float = 1.0
    component: str = "plus"

    def realize(self, grid: RadialGrid) -> SpinorState:
        return gaussian_state(grid, self.center, self.width, self.amplitude,
                              self.component)


@dataclass(frozen=True)
class ModeScanRow:
    mu: float
    strichartz: float
    smoothing: float
    h_half: float
    ratio_strichartz: float
    ratio_smoothing: float
    delta_plus: float
    delta_minus: float


@dataclass(frozen=True)
class NormScanResult:
    """Per-mode norms, ratios, and fitted growth exponents."""

    family: str
    n: int
    p: float
    q: float
    m: float
    epsilon_loss: float
    rows: tuple
    strichartz_slope: Optional[float]
    smoothing_slope: Optional[float]
    strichartz_slope_limit: float
    smoothing_slope_limit: float

    @property
    def strichartz_slope_ok(self) -> Optional[bool]:
        if self.strichartz_slope is None:
            return None
        return self.strichartz_slope <= self.strichartz_slope_limit

    @property
    def smoothing_slope_ok(self) -> Optional[bool]:
        if self.smoothing_slope is None:
            return None
        return self.smoothing_slope <= self.smoothing_slope_limit

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "m": self.m,
            "epsilon_loss": self.epsilon_loss,
            "rows": [vars(row) for row in self.rows],
            "strichartz_slope": self.strichartz_slope,
            "smoothing_slope": self.smoothing_slope,
            "strichartz_slope_limit": self.strichartz_slope_limit,
            "smoothing_slope_limit": self.smoothing_slope_limit,
            "strichartz_slope_ok": self.strichartz_slope_ok,
            "smoothing_slope_ok": self.smoothing_slope_ok,
        }


def _fit_slope(abs_mu: np.ndarray, ratios: np.ndarray) -> Optional[float]:
    """Least-squares slope of log ratio against log |mu|; None if degenerate."""
    if len(np.unique(abs_mu)) < 2:
        return None
    return float(np.polyfit(np.log(abs_mu), np.log(ratios), 1)[0])


def mu_scan(profile: MetricProfile, triple: ExponentTriple,
            mu_list: Sequence[float], data_template: DataTemplate = DataTemplate(),
            grid: Optional[RadialGrid] = None, t_max: float = 8.0,
            samples: int = 33, n: int = 3,
            epsilon_loss: float = DEFAULT_EPSILON_LOSS,
            threads: int = 1) -> NormScanResult:
    """Evolve identical radial data per mode and fit the norm-ratio growth.

    Aborts with the admissibility report attached when any requested mu is
    not admissible for the profile.  Modes evaluate independently (in
    ``threads`` workers when asked); results merge in mode order, so the
    output does not depend on the worker count.
    """
    triple.require_admissible(n)
    grid = grid or RadialGrid()
    initial = data_template.realize(grid)
    if initial.support_radius is not None:
        limit = grid.r_max - initial.support_radius - 2.0
        if t_max > limit + 1e-9:
            raise PolicyError(f"t_max={t_max} exceeds the causal limit {limit:g}")
    times = np.linspace(0.0, t_max, samples)
    h_half = h_sobolev_norm(initial, 0.5, n=n)

    def one_mode(mu: float) -> ModeScanRow:
        report = check_admissible(profile, mu)
        if not report.admissible:
            raise NonAdmissibleError(
                f"mu={mu} is not admissible for {profile.family.value}", report)
        op = assemble_dirac(profile, mu, triple.m, n, grid)
        traj = evolve(op, initial, times)
        stri = strichartz_norm(traj, triple, profile)
        smoo = smoothing_norm(traj, (0.0, t_max))
        return ModeScanRow(
            mu=float(mu), strichartz=stri, smoothing=smoo, h_half=h_half,
            ratio_strichartz=stri / h_half, ratio_smoothing=smoo / h_half,
            delta_plus=report.delta_plus, delta_minus=report.delta_minus,
        )

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_mode, mu_list))
    else:
        rows = [one_mode(mu) for mu in mu_list]
    abs_mu = np.array([abs(row.mu) for row in rows])
    slope_s = _fit_slope(abs_mu, np.array([row.ratio_strichartz for row in rows]))
    slope_m = _fit_slope(abs_mu, np.array([row.ratio_smoothing for row in rows]))
    p_inv = 0.0 if math.isinf(triple.p) else 1.0 / triple.p
    return NormScanResult(
        family=profile.family.value, n=n, p=triple.p, q=triple.q, m=triple.m,
        epsilon_loss=epsilon_loss, rows=tuple(rows),
        strichartz_slope=slope_s, smoothing_slope=slope_m,
        strichartz_slope_limit=5.0 * p_inv + epsilon_loss + SLOPE_SLACK,
        smoothing_slope_limit=SMOOTHING_SLOPE_LIMIT,
    )


def mixed_regularity_aggregate(profile: MetricProfile, triple: ExponentTriple,
                               a: float, b: float,
                               mode_data: Sequence[tuple[ModeIndex, SpinorState]],
                               t_max: float = 8.0, samples: int = 17,
                               n: int = 3) -> tuple[float, float]:
    """Triangle-inequality aggregate against the mixed-regularity norm.

    Returns (lhs, rhs): the sum of weighted per-mode Strichartz norms and
    the H^(a,b) norm of the aggregate initial data.  The exponent gate
    5/(p b) + 1/(2 a) < 1 (massless 3d) or <= 1 (otherwise) mirrors the
    angular-derivative trading condition.
    """
    triple.require_admissible(n)
    if a <= 0.0 or b <= 0.0:
        raise ContractViolationError("exponents a, b must be positive")
    p_inv = 0.0 if math.isinf(triple.p) else 1.0 / triple.p
    gate = 5.0 * p_inv / b + 0.5 / a
    strict = (triple.m == 0.0 and n == 3)
    if (strict and not gate < 1.0) or (not strict and not gate <= 1.0):
        cmp = "<" if strict else "<="
        raise ContractViolationError(
            f"exponent condition 5/(p b) + 1/(2 a) {cmp} 1 fails: got {gate:g}")
    if not mode_data:
        raise ConfigurationError("mode_data must not be empty")
    times = np.linspace(0.0, t_max, samples)
    lhs = 0.0
    for mode, state in mode_data:
        op = assemble_dirac(profile, float(mode.mu), triple.m, n, state.grid)
        traj = evolve(op, state, times)
        lhs += strichartz_norm(traj, triple, profile)
    rhs = h_ab_norm(mode_data, a, b, n=n)
    return lhs, rhs

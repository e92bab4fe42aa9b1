"""Discrete radial operators on the flattened half-line.

Everything is conjugated by r^((n-1)/2) so the mode operators act on plain
L^2(dr): the Dirac block form becomes

    h = [[ m, -d/dr + V ],
         [ d/dr + V, -m ]],      V = mu / phi,

and its square decouples into  diag(m^2 - d2/dr2 + V^2 - V',
                                    m^2 - d2/dr2 + V^2 + V').

The first derivative uses the centered antisymmetric stencil so the two
off-diagonal blocks are exact transposes and h is exactly symmetric; the
Klein-Gordon side uses the standard 3-point second difference.  The grid is
cell-centered, r_i = (i + 1/2) dr, so V is never evaluated at r = 0, with an
effective Dirichlet truncation at r_max.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .admissibility import ModePotential
from .errors import ConfigurationError, GridTooCoarseError, NumericalError
from .profiles import Family, MetricProfile

__all__ = ["RadialGrid", "DiscreteRadialOperator", "sigma", "sigma_n",
           "assemble_dirac", "assemble_kg", "flat_reference_operator",
           "weighted_laplacian_operator", "verify_square", "factorization_check",
           "norm_equivalence_check", "probe_functions",
           "DEFAULT_R_MAX", "DEFAULT_N_CELLS"]

DEFAULT_R_MAX = 40.0
DEFAULT_N_CELLS = 2048
_MIN_CELLS = 16
_BOUNDARY_SKIN = 4  # cells dropped at each end in stencil-mismatch residuals


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centered uniform grid on (0, r_max]."""

    r_max: float = DEFAULT_R_MAX
    n_cells: int = DEFAULT_N_CELLS

    def __post_init__(self):
        if self.r_max <= 0:
            raise ConfigurationError("r_max must be positive")
        if self.n_cells < 2:
            raise ConfigurationError("grid needs at least 2 cells")

    @property
    def dr(self) -> float:
        return self.r_max / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dr


@dataclass(eq=False)
class DiscreteRadialOperator:
    """Hermitian matrix representation of one flattened radial operator.

    ``kind`` is one of "dirac", "kg_plus", "kg_minus", "flat_shift",
    "weighted_laplacian".  Dirac matrices are 2N x 2N in block layout
    (first block v_plus, second v_minus); the rest are N x N.
    """

    grid: RadialGrid
    kind: str
    matrix: np.ndarray
    profile: Optional[MetricProfile] = None
    mu: Optional[float] = None
    m: Optional[float] = None
    n: Optional[int] = None
    flattened: bool = True
    _eig: Optional[tuple] = field(default=None, repr=False, compare=False)

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached eigendecomposition (eigenvalues, orthonormal columns)."""
        if self._eig is None:
            try:
                self._eig = scipy.linalg.eigh(self.matrix)
            except scipy.linalg.LinAlgError as exc:  # pragma: no cover
                raise NumericalError(f"eigendecomposition failed: {exc}") from exc
        return self._eig

    def hermiticity_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m - m.T.conj())))

    def same_mode(self, other: "DiscreteRadialOperator") -> bool:
        return (self.grid == other.grid and self.profile == other.profile
                and self.mu == other.mu and self.m == other.m and self.n == other.n)


def sigma(profile: MetricProfile, r):
    """(sigma, sigma') with sigma = r/phi, continued by sigma(0) = 1.

    sigma'(0) = -phi''(0)/2; elsewhere sigma' = (1/r - phi'/phi) sigma.
    """
    arr = np.asarray(r, dtype=float)
    scalar = np.isscalar(r) or arr.ndim == 0
    arr = np.atleast_1d(arr)
    phi, dphi, d2phi = profile.phi_dphi_d2phi(arr)
    s = np.empty_like(arr)
    sp = np.empty_like(arr)
    pos = arr > 0.0
    s[pos] = arr[pos] / phi[pos]
    sp[pos] = (1.0 / arr[pos] - dphi[pos] / phi[pos]) * s[pos]
    s[~pos] = 1.0
    _, _, d2_at_0 = profile.phi_dphi_d2phi(np.array([0.0]))
    sp[~pos] = -0.5 * d2_at_0[0]
    if scalar:
        return float(s[0]), float(sp[0])
    return s, sp


def sigma_n(profile: MetricProfile, r, n: int):
    """sigma^((n-1)/2), the weighted-spinor conjugation factor."""
    s, _ = sigma(profile, r)
    return s ** ((n - 1) / 2.0)


def _first_derivative(grid: RadialGrid) -> np.ndarray:
    """Centered antisymmetric d/dr with zero extension at both ends."""
    n = grid.n_cells
    e = np.ones(n - 1) / (2.0 * grid.dr)
    return np.diag(e, 1) - np.diag(e, -1)


def _second_difference(grid: RadialGrid) -> np.ndarray:
    """-d2/dr2, 3-point stencil, zero extension (positive semidefinite)."""
    n = grid.n_cells
    main = np.full(n, 2.0) / grid.dr**2
    off = np.full(n - 1, -1.0) / grid.dr**2
    return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)


def _check_grid(grid: RadialGrid):
    if grid.n_cells < _MIN_CELLS:
        raise GridTooCoarseError(
            f"need at least {_MIN_CELLS} cells, got {grid.n_cells}")


def assemble_dirac(profile: MetricProfile, mu: float, m: float, n: int,
                   grid: RadialGrid) -> DiscreteRadialOperator:
    """Flattened mode Dirac operator as an exactly symmetric 2N x 2N matrix."""
    _check_grid(grid)
    pot = ModePotential(profile=profile, mu=mu, n=n)
    v = np.diag(pot.V(grid.nodes))
    d = _first_derivative(grid)
    nn = grid.n_cells
    h = np.zeros((2 * nn, 2 * nn))
    h[:nn, :nn] = m * np.eye(nn)
    h[nn:, nn:] = -m * np.eye(nn)
    h[:nn, nn:] = -d + v
    h[nn:, :nn] = d + v
    return DiscreteRadialOperator(grid=grid, kind="dirac", matrix=h,
                                  profile=profile, mu=mu, m=m, n=n)


def assemble_kg(profile: MetricProfile, mu: float, m: float, n: int,
                sign: int, grid: RadialGrid) -> DiscreteRadialOperator:
    """Flattened Klein-Gordon operator m^2 - d2/dr2 + V^2 + sign V'."""
    _check_grid(grid)
    if sign not in (+1, -1):
        raise ConfigurationError("sign must be +1 or -1")
    pot = ModePotential(profile=profile, mu=mu, n=n)
    r = grid.nodes
    pot_diag = pot.V(r) ** 2 + sign * pot.V_prime(r) + m * m
    k = _second_difference(grid) + np.diag(pot_diag)
    kind = "kg_plus" if sign > 0 else "kg_minus"
    return DiscreteRadialOperator(grid=grid, kind=kind, matrix=k,
                                  profile=profile, mu=mu, m=m, n=n)


def flat_reference_operator(n: int, grid: RadialGrid) -> DiscreteRadialOperator:
    """Flattened flat radial Laplacian H0 = -d2/dr2 + (n-1)(n-3)/(4 r^2)."""
    _check_grid(grid)
    r = grid.nodes
    h0 = _second_difference(grid) + np.diag((n - 1) * (n - 3) / (4.0 * r**2))
    return DiscreteRadialOperator(grid=grid, kind="flat_shift", matrix=h0, n=n)


def weighted_laplacian_operator(profile: MetricProfile, n: int,
                                grid: RadialGrid) -> DiscreteRadialOperator:
    """Flattened phi-weighted radial Laplacian.

    Conjugating -phi^(1-n) d(phi^(n-1) d .) by phi^((n-1)/2) gives
    -d2/dr2 + k(k-1)(phi'/phi)^2 + k phi''/phi with k = (n-1)/2.
    """
    _check_grid(grid)
    r = grid.nodes
    phi, dphi, d2phi = profile.phi_dphi_d2phi(r)
    k = (n - 1) / 2.0
    w = k * (k - 1.0) * (dphi / phi) ** 2 + k * d2phi / phi
    a = _second_difference(grid) + np.diag(w)
    return DiscreteRadialOperator(grid=grid, kind="weighted_laplacian", matrix=a,
                                  profile=profile, n=n)


def sigma_log_derivative_bound(profile: MetricProfile, scan=None) -> float:
    """sup over r of |sigma'/sigma| = |1/r - phi'/phi|, by extremum scan.

    This is the constant entering the weighted/flat Sobolev norm
    equivalence; finite for every supported family.
    """
    from .scan import DEFAULT_SCAN_POLICY, scan_supremum

    scan = scan or DEFAULT_SCAN_POLICY

    def f(r):
        _, s2, _ = profile.ratios(r)
        return np.abs((1.0 - s2) / r)

    _, _, d2_at_0 = profile.phi_dphi_d2phi(np.array([0.0]))
    at_zero = abs(0.5 * float(d2_at_0[0]))
    at_inf = 1.0 if profile.family is Family.SINH else 0.0
    return scan_supremum(f, scan, limit_at_zero=at_zero,
                         limit_at_infinity=at_inf).value


def probe_functions(grid: RadialGrid, count: int = 5) -> np.ndarray:
    """Fixed family of smooth interior bumps used by residual checks.

    Columns are Gaussians with centers on [0.25, 0.65] r_max and widths
    scaled to r_max, so they vanish at both boundaries to double precision.
    """
    r = grid.nodes
    centers = np.linspace(0.25, 0.65, count) * grid.r_max
    widths = np.linspace(0.035, 0.06, count) * grid.r_max
    cols = [np.exp(-((r - c) / w) ** 2) for c, w in zip(centers, widths)]
    return np.stack(cols, axis=1)


def _interior(vcols: np.ndarray) -> np.ndarray:
    return vcols[_BOUNDARY_SKIN:-_BOUNDARY_SKIN, :]


def verify_square(dirac: DiscreteRadialOperator,
                  kg_minus: DiscreteRadialOperator,
                  kg_plus: DiscreteRadialOperator) -> float:
    """Consistency residual of h^2 = diag(KG_minus, KG_plus).

    The identity cannot hold entrywise between inequivalent stencils, so the
    residual is measured on the fixed smooth probe family: Frobenius norm of
    (h^2 - diag(K-, K+)) P over interior cells, relative to diag(K-, K+) P.
    Second-order decay in dr is the contract.
    """
    for kg, kind in ((kg_minus, "kg_minus"), (kg_plus, "kg_plus")):
        if kg.kind != kind or not dirac.same_mode(kg):
            raise ConfigurationError(
                f"operator mismatch: expected {kind} on the same mode/grid")
    nn = dirac.grid.n_cells
    p = probe_functions(dirac.grid)
    pp = np.vstack([p, p[:, ::-1]])
    hhp = dirac.matrix @ (dirac.matrix @ pp)
    kp = np.vstack([kg_minus.matrix @ p, kg_plus.matrix @ p[:, ::-1]])
    res = hhp - kp
    num = np.linalg.norm(_interior(res[:nn])) ** 2 + np.linalg.norm(_interior(res[nn:])) ** 2
    den = np.linalg.norm(_interior(kp[:nn])) ** 2 + np.linalg.norm(_interior(kp[nn:])) ** 2
    return float(np.sqrt(num / den))


def factorization_check(profile: MetricProfile, mu: float, m: float, n: int,
                        grid: RadialGrid) -> tuple[float, float]:
    """Residuals of V_- V_+ = KG_minus and V_+ V_- = KG_plus.

    V_pm are the flattened first-order factors V +- d/dr.  The identity is
    mass-free, so both sides are compared without the m^2 shift and the
    result does not depend on ``m`` at all.
    """
    _check_grid(grid)
    pot = ModePotential(profile=profile, mu=mu, n=n)
    v = np.diag(pot.V(grid.nodes))
    d = _first_derivative(grid)
    a_plus = v + d
    a_minus = v - d
    kg_m = assemble_kg(profile, mu, 0.0, n, -1, grid).matrix
    kg_p = assemble_kg(profile, mu, 0.0, n, +1, grid).matrix
    p = probe_functions(grid)

    def rel(lhs_cols, rhs_cols):
        return float(np.linalg.norm(_interior(lhs_cols - rhs_cols))
                     / np.linalg.norm(_interior(rhs_cols)))

    res_minus = rel(a_minus @ (a_plus @ p), kg_m @ p)
    res_plus = rel(a_plus @ (a_minus @ p), kg_p @ p)
    return res_minus, res_plus


def _random_bump(rng: np.random.Generator, grid: RadialGrid) -> np.ndarray:
    """Random smooth function supported well inside the grid."""
    r = grid.nodes
    out = np.zeros_like(r)
    for _ in range(rng.integers(1, 4)):
        c = rng.uniform(0.2 * grid.r_max, 0.6 * grid.r_max)
        w = rng.uniform(0.03 * grid.r_max, 0.08 * grid.r_max)
        out += rng.uniform(-1.0, 1.0) * np.exp(-((r - c) / w) ** 2)
    if np.linalg.norm(out) == 0.0:  # pragma: no cover
        out += np.exp(-((r - 0.4 * grid.r_max) / (0.05 * grid.r_max)) ** 2)
    return out


def norm_equivalence_check(profile: MetricProfile, n: int, s: float,
                           trials: int = 100, grid: Optional[RadialGrid] = None,
                           seed: int = 0) -> tuple[float, float]:
    """Empirical two-sided H^s ratio between phi-weighted and flat norms.

    Multiplication by sigma_n maps the flat-measure H^s onto the weighted
    one; in flattened variables both norms act on the same vector, through
    (1 + A_phi)^(s/2) and (1 + H0)^(s/2) respectively.  Returns
    (max ratio, max inverse ratio) over the random trials.
    """
    if not 0.0 <= s <= 1.0:
        raise ConfigurationError(f"s must be in [0, 1], got {s}")
    grid = grid or RadialGrid()
    a_phi = weighted_laplacian_operator(profile, n, grid)
    a_flat = flat_reference_operator(n, grid)
    w_phi, u_phi = a_phi.eigh()
    w_flat, u_flat = a_flat.eigh()
    # clip tiny negative roundoff before the fractional power
    pw_phi = np.maximum(1.0 + w_phi, 0.0) ** (s / 2.0)
    pw_flat = np.maximum(1.0 + w_flat, 0.0) ** (s / 2.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_inv = 0.0
    for _ in range(trials):
        v = _random_bump(rng, grid)
        num = np.linalg.norm(pw_phi * (u_phi.T @ v))
        den = np.linalg.norm(pw_flat * (u_flat.T @ v))
        ratio = num / den
        worst = max(worst, ratio)
        worst_inv = max(worst_inv, 1.0 / ratio)
    return worst, worst_inv

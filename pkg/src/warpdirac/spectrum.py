"""Angular Dirac spectrum bookkeeping on the round sphere.

Eigenvalues live in +-((n-1)/2 + N); each eigenvalue carries the spherical
harmonic degrees of its two spinor components and, in three dimensions, an
explicit multiplicity.  Everything here is exact arithmetic on dyadic
rationals; no floats enter the combinatorics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ConfigurationError

__all__ = ["ModeIndex", "LPBand", "sphere_spectrum", "lp_band", "modes_in_band",
           "band_index", "laplace_eigenvalue_check"]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    f = Fraction(x).limit_denominator(2)
    if float(f) != float(x):
        raise ConfigurationError(f"eigenvalue {x} is not a half-integer")
    return f


def _degrees(mu: Fraction, n: int) -> tuple[int, int]:
    """Harmonic degrees (plus component, minus component) for eigenvalue mu."""
    half = Fraction(n - 1, 2)
    if mu > 0:
        dp, dm = mu - half, mu - half + 1
    else:
        dp, dm = -mu - half + 1, -mu - half
    if dp.denominator != 1 or dm.denominator != 1 or dp < 0 or dm < 0:
        raise ConfigurationError(f"mu={mu} is not in the sphere spectrum for n={n}")
    return int(dp), int(dm)


@dataclass(frozen=True)
class ModeIndex:
    """One angular eigenvalue with its degree and multiplicity metadata.

    ``multiplicity`` is exact for n = 3 (2|mu|); for n > 3 it is optional
    metadata supplied from an external table and only used as a weight,
    never in correctness checks.
    """

    mu: Fraction
    n: int
    degree_plus: int
    degree_minus: int
    multiplicity: Optional[int] = None

    @property
    def mu_float(self) -> float:
        return float(self.mu)

    @property
    def abs_mu(self) -> Fraction:
        return abs(self.mu)

    def angular_laplace_eigenvalue(self, component: str) -> int:
        """l (l + n - 2) at the stored degree of the requested component."""
        deg = self.degree_plus if component == "+" else self.degree_minus
        return deg * (deg + self.n - 2)


@dataclass(frozen=True)
class LPBand:
    """Dyadic eigenvalue band [a, b] matched to harmonic degrees [2^j, 2^(j+1))."""

    j: int
    a: Fraction
    b: Fraction


def make_mode(mu, n: int, multiplicity: Optional[int] = None) -> ModeIndex:
    """Build one ModeIndex, validating mu against the sphere spectrum."""
    if n < 3:
        raise ConfigurationError(f"dimension n must be >= 3, got {n}")
    muf = _as_fraction(mu)
    if muf == 0:
        raise ConfigurationError("mu = 0 is not in the sphere Dirac spectrum")
    dp, dm = _degrees(muf, n)
    if multiplicity is None and n == 3:
        multiplicity = int(2 * abs(muf))
    return ModeIndex(mu=muf, n=n, degree_plus=dp, degree_minus=dm,
                     multiplicity=multiplicity)


def sphere_spectrum(n: int, mu_max,
                    multiplicity_table: Optional[dict] = None) -> list[ModeIndex]:
    """All modes with |mu| <= mu_max, both signs, ordered by mu.

    ``multiplicity_table`` maps |mu| (as Fraction or float) to a positive
    integer; required only if multiplicities matter for n > 3.
    """
    if n < 3:
        raise ConfigurationError(f"dimension n must be >= 3, got {n}")
    mu_max = Fraction(mu_max).limit_denominator(10**6)
    gap = Fraction(n - 1, 2)
    modes: list[ModeIndex] = []
    mu = gap
    while mu <= mu_max:
        mult = None
        if multiplicity_table is not None:
            mult = multiplicity_table.get(mu, multiplicity_table.get(float(mu)))
        for signed in (-mu, mu):
            modes.append(make_mode(signed, n, multiplicity=mult))
        mu += 1
    modes.sort(key=lambda m: m.mu)
    return modes


def lp_band(n: int, j: int) -> LPBand:
    """Band j: a = (n-1)/2 + 2^j - 1, b = (n-1)/2 + 2^(j+1)."""
    if n < 3:
        raise ConfigurationError(f"dimension n must be >= 3, got {n}")
    if j < 0:
        raise ConfigurationError(f"band index must be >= 0, got {j}")
    half = Fraction(n - 1, 2)
    return LPBand(j=j, a=half + 2**j - 1, b=half + 2 ** (j + 1))


def modes_in_band(band: LPBand, modes: list[ModeIndex]) -> list[ModeIndex]:
    return [m for m in modes if band.a <= m.abs_mu <= band.b]


def band_index(mode: ModeIndex) -> int:
    """Smallest j whose band [a_j, b_j] contains |mu| (bands overlap)."""
    j = 0
    while True:
        band = lp_band(mode.n, j)
        if band.a <= mode.abs_mu <= band.b:
            return j
        if band.a > mode.abs_mu:
            raise ConfigurationError(f"|mu|={mode.abs_mu} below every band")
        j += 1


def laplace_eigenvalue_check(mode: ModeIndex, component: str) -> tuple[Fraction, Fraction]:
    """(lhs, rhs) of the flat-Laplacian eigenvalue identity for one component.

    lhs is the product formula in mu; rhs is l (l + n - 2) at the stored
    degree.  The contract lhs == rhs holds exactly.
    """
    if component not in ("+", "-"):
        raise ConfigurationError("component must be '+' or '-'")
    mu, n = mode.mu, mode.n
    half = Fraction(n - 1, 2)
    if component == "+":
        lhs = (mu - half) * (mu + half - 1)
        deg = mode.degree_plus
    else:
        lhs = (mu + half) * (mu - half + 1)
        deg = mode.degree_minus
    rhs = Fraction(deg * (deg + n - 2))
    return lhs, rhs

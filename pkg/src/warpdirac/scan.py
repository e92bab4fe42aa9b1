"""Deterministic extremum scans over the radial half-line.

All infima/suprema of radial functionals are evaluated the same way: a
logarithmic grid on [r_min, r_max], golden-section refinement around the
discrete extremum, and analytic limits at r -> 0+ and r -> infinity appended
when the caller can supply them.  This makes every reported constant
reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = ["InfimumScanPolicy", "ScanExtremum", "scan_infimum", "scan_supremum",
           "DEFAULT_SCAN_POLICY"]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_REFINE_ITERS = 80


@dataclass(frozen=True)
class InfimumScanPolicy:
    """Grid parameters for extremum scans on (0, infinity)."""

    r_min: float = 1e-6
    r_max: float = 1e6
    points: int = 100_000

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise ValueError("scan range must satisfy 0 < r_min < r_max")
        if self.points < 16:
            raise ValueError("scan needs at least 16 points")

    def grid(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.points)


DEFAULT_SCAN_POLICY = InfimumScanPolicy()


@dataclass(frozen=True)
class ScanExtremum:
    """Result of a scan: extremal value, its witness r, divergence flag.

    ``arg_r`` is 0.0 or math.inf when an appended analytic limit is the
    extremum.  ``diverging`` is set when the scan detects a monotone trend
    past the grid edge with no analytic limit to settle it; the value is
    then the +-inf sentinel.
    """

    value: float
    arg_r: float
    diverging: bool = False


def _golden_refine(f: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """Golden-section minimum of f on [lo, hi] (log-r coordinates)."""
    a, b = math.log(lo), math.log(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    for _ in range(_REFINE_ITERS):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(math.exp(d))
        if b - a < 1e-14:
            break
    x = math.exp(0.5 * (a + b))
    return f(x), x


def scan_infimum(
    f: Callable[[np.ndarray], np.ndarray],
    policy: InfimumScanPolicy = DEFAULT_SCAN_POLICY,
    limit_at_zero: Optional[float] = None,
    limit_at_infinity: Optional[float] = None,
) -> ScanExtremum:
    """Infimum of a vectorized radial functional under the scan policy.

    ``f`` must accept an ndarray of radii r > 0.  Analytic limits are
    appended as candidate values with witnesses 0.0 / inf.
    """
    r = policy.grid()
    vals = np.asarray(f(r), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmax(~np.isfinite(vals)))
        raise FloatingPointError(f"scan functional not finite at r={r[bad]:g}")
    i = int(np.argmin(vals))
    best, arg = float(vals[i]), float(r[i])

    if 0 < i < len(r) - 1:
        refined, x = _golden_refine(lambda s: float(f(np.array([s]))[0]), r[i - 1], r[i + 1])
        if refined < best:
            best, arg = refined, x

    # Edge heuristics: a strict decrease into an edge with no limit available
    # is reported as divergence rather than a spurious finite infimum.
    span = float(np.max(vals) - np.min(vals))
    tol = 1e-9 * max(1.0, abs(best)) + 1e-12 * span
    if i == len(r) - 1 and limit_at_infinity is None and vals[-1] < vals[-2] - tol:
        return ScanExtremum(-math.inf, math.inf, diverging=True)
    if i == 0 and limit_at_zero is None and vals[0] < vals[1] - tol:
        return ScanExtremum(-math.inf, 0.0, diverging=True)

    if limit_at_zero is not None and limit_at_zero < best:
        best, arg = float(limit_at_zero), 0.0
    if limit_at_infinity is not None and limit_at_infinity < best:
        best, arg = float(limit_at_infinity), math.inf
    return ScanExtremum(best, arg)


def scan_supremum(
    f: Callable[[np.ndarray], np.ndarray],
    policy: InfimumScanPolicy = DEFAULT_SCAN_POLICY,
    limit_at_zero: Optional[float] = None,
    limit_at_infinity: Optional[float] = None,
) -> ScanExtremum:
    """Supremum scan; mirrors :func:`scan_infimum`."""
    neg_zero = None if limit_at_zero is None else -limit_at_zero
    neg_inf = None if limit_at_infinity is None else -limit_at_infinity
    res = scan_infimum(lambda r: -np.asarray(f(r)), policy, neg_zero, neg_inf)
    return ScanExtremum(-res.value, res.arg_r, res.diverging)

"""Exception taxonomy shared by all modules.

Each error class carries the process exit code used by the command-line
driver: 0 pass, 2 contract violation, 3 non-admissible metric,
4 configuration error, 5 numerical failure.
"""

from __future__ import annotations


class WarpDiracError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ContractViolationError(WarpDiracError):
    """A quantitative contract (gate, tolerance, exponent condition) failed."""

    exit_code = 2


class NonAdmissibleError(WarpDiracError):
    """The metric fails the admissibility conditions for a requested mode.

    Carries the offending report in ``report`` when available.
    """

    exit_code = 3

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ConfigurationError(WarpDiracError):
    """Invalid parameters, malformed config, or violated preconditions."""

    exit_code = 4


class UnsupportedFamilyError(ConfigurationError):
    """Operation requires a profile family it does not support."""


class HypothesisViolationError(ConfigurationError):
    """An explicit standing hypothesis (e.g. mu0 > 1/2) is violated."""


class PolicyError(ConfigurationError):
    """Request falls outside the causal-window policy."""


class GridTooCoarseError(ConfigurationError):
    """Radial grid has too few cells for the requested discretization."""


class NumericalError(WarpDiracError):
    """A numerical routine (eigensolver, quadrature) failed."""

    exit_code = 5

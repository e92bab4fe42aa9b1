"""Radial Dirac equation on warped products: operators, flows, estimate checks."""

from .admissibility import (AdmissibilityReport, ModePotential, check_admissible,
                            delta_c, delta_phi, delta_pm, delta_lower_bound)
from .errors import (ConfigurationError, ContractViolationError, GridTooCoarseError,
                     HypothesisViolationError, NonAdmissibleError, NumericalError,
                     PolicyError, UnsupportedFamilyError, WarpDiracError)
from .estimates import (DataTemplate, ExponentTriple, NormScanResult, h_ab_norm,
                        h_sobolev_norm, is_admissible_triple, mu_scan,
                        smoothing_norm, strichartz_norm, mixed_regularity_aggregate)
from .evolution import (FlatBesselOracle, SpinorState, SpinorTrajectory,
                        evolve, flat_exact_solution, gaussian_state, kg_crosscheck)
from .operators import (DiscreteRadialOperator, RadialGrid, assemble_dirac,
                        assemble_kg, factorization_check, flat_reference_operator,
                        norm_equivalence_check, sigma, sigma_n, verify_square)
from .profiles import (A2Verdict, Family, MetricProfile, ProfileConstants,
                       check_A2, eval_phi, profile_constants)
from .scan import DEFAULT_SCAN_POLICY, InfimumScanPolicy
from .spectrum import (LPBand, ModeIndex, band_index, laplace_eigenvalue_check,
                       lp_band, make_mode, modes_in_band, sphere_spectrum)

__version__ = "0.1.0"

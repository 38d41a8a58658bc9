"""Desk-scale laboratory for shifted Waring counts.

Counts integer solutions of |sum (x_i - theta_i)^k - tau| < eta with
irrational shifts, reconstructs the counts through Davenport-Heilbronn
integrals against tent and sandwich kernels, splits those integrals by
Hardy-Littlewood arc class, and measures empirical growth exponents for
the restricted and whole-line moments that drive the method.
"""

from ._backend import BACKEND
from .core import (Instance, PRESETS, Query, ShiftPreset,
                   best_conditional_level, conditional_threshold,
                   expected_main_term, main_term_raw, power_sum_gap,
                   resolve_shift, shifted_power_sum, variable_threshold)
from .counting import (CountResult, count_meet_middle, count_power_system,
                       count_power_system_shifted, count_solutions,
                       count_solutions_boxed, weighted_solution_count)
from .dissection import (ARC_CLASSES, ArcLabel, DissectionParams,
                         RationalApprox, approximable_intervals,
                         approximable_measure_bound, best_rational,
                         classify_frequency, is_poorly_approximable)
from .errors import (BudgetExceededError, ConfigError,
                     HypothesisViolationError, MeshTooCoarseError,
                     NonConvergenceError, ShiftWaringError,
                     TransformUnavailableError)
from .expsum import (ApproxResult, CoeffVector, RationalCoeffs,
                     complete_exp_sum, exp_sum_product, hypothesis_bound,
                     hypothesis_fit, min_distance_average,
                     poly_phase_integral, rational_point_approx,
                     shift_polynomial_coeffs, shifted_exp_sum,
                     simultaneous_rational_fit)
from .integrator import (QuadratureResult, SlopeFit, arc_contributions,
                         dh_integral, dh_integral_multi,
                         default_truncation, slope_estimate, hua_moment,
                         kernel_transform, minor_moment)
from .kernels import (KINDS, KernelParams, KernelSpec, SMOOTHING_CHOICES,
                      cosine_pieces, decay_envelope, eval_from_pieces,
                      eval_kernel, fourier_transform, indicator_sandwich,
                      mass_bound, smoothing_scale, tail_mass)

__version__ = "0.1.0"

__all__ = [
    "ARC_CLASSES", "ApproxResult", "ArcLabel", "BACKEND",
    "BudgetExceededError", "CoeffVector", "ConfigError", "CountResult",
    "DissectionParams", "HypothesisViolationError", "Instance", "KINDS",
    "KernelParams", "KernelSpec", "MeshTooCoarseError",
    "NonConvergenceError", "PRESETS", "QuadratureResult", "Query",
    "RationalApprox", "RationalCoeffs", "SMOOTHING_CHOICES",
    "ShiftPreset", "ShiftWaringError", "SlopeFit",
    "TransformUnavailableError", "approximable_intervals",
    "approximable_measure_bound", "arc_contributions",
    "best_conditional_level", "best_rational", "classify_frequency",
    "complete_exp_sum", "conditional_threshold", "cosine_pieces",
    "count_meet_middle", "count_power_system",
    "count_power_system_shifted", "count_solutions",
    "count_solutions_boxed", "dh_integral",
    "dh_integral_multi", "decay_envelope", "default_truncation",
    "eval_from_pieces", "eval_kernel", "exp_sum_product",
    "expected_main_term", "slope_estimate", "fourier_transform",
    "hua_moment", "hypothesis_bound", "hypothesis_fit",
    "indicator_sandwich", "is_poorly_approximable", "kernel_transform",
    "main_term_raw", "mass_bound", "min_distance_average",
    "poly_phase_integral", "power_sum_gap", "rational_point_approx",
    "resolve_shift", "minor_moment", "shift_polynomial_coeffs",
    "shifted_exp_sum", "shifted_power_sum", "simultaneous_rational_fit",
    "smoothing_scale", "variable_threshold", "weighted_solution_count",
]

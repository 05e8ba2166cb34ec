"""Matrix measures, weak pairings and sampled contraction certificates for
monotone and positive systems."""

from .certify import (Box, Certificate, average_jacobian, certify_jacobian_conic,
                      check_dini_contraction, check_equilibrium_contraction,
                      check_equilibrium_trajectory, check_factored_conic, check_l1_eta,
                      check_linf_eta, check_one_sided_lipschitz, check_trajectory_contraction,
                      norm_equivalence_constant, recheck_witness)
from .measures import (MeasureResult, conic_measure, conic_measure_limit_oracle,
                       conic_measure_wp_sup, matrix_measure, metzler_weighted_measures)
from .normcore import (DimensionError, NormSpec, conjugate_exponent, is_metzler, is_nonnegative,
                       weighted_norm)
from .odesim import (HypothesisViolation, IntegrationError, Trajectory, VectorField,
                     check_order_preservation, check_positivity, coppel_check, flow, flow_pair)
from .pairings import (MaxIndexSet, ZeroVectorError, check_curve_norm_derivative, check_deimling,
                       max_index_set, wp)
from .reports import CheckReport

__version__ = "0.1.0"

__all__ = [
    "Box", "Certificate", "CheckReport", "DimensionError", "HypothesisViolation",
    "IntegrationError", "MaxIndexSet", "MeasureResult", "NormSpec", "Trajectory", "VectorField",
    "ZeroVectorError", "average_jacobian", "certify_jacobian_conic", "check_curve_norm_derivative",
    "check_deimling", "check_dini_contraction", "check_equilibrium_contraction",
    "check_equilibrium_trajectory", "check_factored_conic", "check_l1_eta", "check_linf_eta",
    "check_one_sided_lipschitz", "check_order_preservation", "check_positivity",
    "check_trajectory_contraction", "conic_measure", "conic_measure_limit_oracle",
    "conic_measure_wp_sup", "conjugate_exponent", "coppel_check", "flow", "flow_pair",
    "is_metzler", "is_nonnegative", "matrix_measure", "max_index_set",
    "metzler_weighted_measures", "norm_equivalence_constant", "recheck_witness", "weighted_norm",
    "wp",
]

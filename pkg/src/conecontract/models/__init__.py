"""Built-in model families: Hopfield networks, separable and comparison systems."""

from .catalog import CatalogError, InputSignal, ScalarFn
from .comparison import (ComparisonSpec, IssEnvelope, MissingCertificateError, coordinate_constants,
                         interconnection_certify, iss_envelope, matrosov_certify,
                         small_gain_linear)
from .hopfield import (HopfieldCertificate, HopfieldEquilibrium, HopfieldNetwork, NoCertificateError,
                       hopfield_certificate, hopfield_equilibrium, hopfield_weights)
from .loader import ModelFormatError, as_vector_field, load_model
from .perron import PerronPair, ReducibleMatrixError, is_irreducible, perron_eigpair
from .separable import SeparableSystem, separable_contraction, separable_structure_matrix

__all__ = [
    "CatalogError", "ComparisonSpec", "HopfieldCertificate", "HopfieldEquilibrium",
    "HopfieldNetwork", "InputSignal", "IssEnvelope", "MissingCertificateError",
    "ModelFormatError", "NoCertificateError", "PerronPair", "ReducibleMatrixError",
    "ScalarFn", "SeparableSystem", "as_vector_field", "coordinate_constants",
    "hopfield_certificate", "hopfield_equilibrium", "hopfield_weights",
    "interconnection_certify", "is_irreducible", "iss_envelope", "load_model",
    "matrosov_certify", "perron_eigpair", "separable_contraction",
    "separable_structure_matrix", "small_gain_linear",
]

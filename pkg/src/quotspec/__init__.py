"""Spectra of commuting row contractions through Koszul homology and characteristic functions.

Finite-dimensional quotients of the Drury-Arveson space give exactly
representable pure row contractions. For these the package computes the
Taylor and right spectra, the characteristic function and its defect
data, and checks the operator identities that tie them together.
"""

from .charfn import (
    CharFnDeterminant,
    CharFnEvaluator,
    annihilator_from_charfn,
    beurling_range_check,
    canonical_dilation,
    charfn_eval,
    charfn_taylor,
    defect_data,
    dual_identity_residual,
    surjectivity_margin,
)
from .da_model import KernelModelSpec, TruncatedDA, compression_residual, mult_op_matrix, quotient_tuple
from .errors import InputError, NumericalBreakdown, QuotspecError
from .harness import GridSpec, Model, SpectrumReport, compare_spectra, run_scenario, scan_margins
from .koszul import build_koszul, homology_dims, in_final_kernel, in_right_spectrum, taylor_spectrum
from .numerics import numerical_rank, principal_angles, psd_sqrt, range_basis
from .polynomials import MultiPoly, PolyMatrix, az_profile, poly_adjugate, poly_det, vanishing_ideal_generators
from .tuples import CommutingTuple, is_pure, is_row_contraction, joint_eigenvalues, validate_tuple

__version__ = "0.1.0"

__all__ = [
    "CharFnDeterminant",
    "CharFnEvaluator",
    "CommutingTuple",
    "GridSpec",
    "InputError",
    "KernelModelSpec",
    "Model",
    "MultiPoly",
    "NumericalBreakdown",
    "PolyMatrix",
    "QuotspecError",
    "SpectrumReport",
    "TruncatedDA",
    "annihilator_from_charfn",
    "az_profile",
    "beurling_range_check",
    "build_koszul",
    "canonical_dilation",
    "charfn_eval",
    "charfn_taylor",
    "compare_spectra",
    "compression_residual",
    "defect_data",
    "dual_identity_residual",
    "homology_dims",
    "in_final_kernel",
    "in_right_spectrum",
    "is_pure",
    "is_row_contraction",
    "joint_eigenvalues",
    "mult_op_matrix",
    "numerical_rank",
    "poly_adjugate",
    "poly_det",
    "principal_angles",
    "psd_sqrt",
    "quotient_tuple",
    "range_basis",
    "run_scenario",
    "scan_margins",
    "surjectivity_margin",
    "taylor_spectrum",
    "validate_tuple",
    "vanishing_ideal_generators",
]

"""Poisson brackets on rational maps of the Riemann sphere: contour and
closed-form brackets, coordinate Poisson tensors, Jacobi checks, Darboux
charts and Casimirs."""

from .brackets import (
    BracketValue,
    bracket_ah,
    bracket_ansatz,
    bracket_contour,
    bracket_z,
    jacobi_defect_ansatz,
    jacobi_defect_contour,
    residue_decomposition_check,
    triple_bracket_contour,
)
from .contour import (
    ContourSpec,
    FWeight,
    QuadratureResult,
    integrate,
    pole_contours,
    residue_at_infinity,
)
from .identities import verify_proof_identities
from .ratfun import (
    PolynomialPair,
    RationalMap,
    evaluate,
    evaluate_derivative,
    from_polynomial_pair,
    make_rational_map,
    random_instance,
    to_polynomial_pair,
)

__version__ = "0.1.0"

"""Gaussian Wick calculus in finitely many variables and a numerical
laboratory for Hoelder-Young inequalities of generalized Wick products."""

__version__ = "0.1.0"

from .chaos import (
    ChaosExpansion,
    ExponentialVector,
    exp_expansion,
    exp_lp_norm,
    functorial_transport,
    pointwise_product,
    second_quantization,
    t_wick_by_definition,
    t_wick_exponentials,
    t_wick_product,
    wick_product,
)
from .errors import (
    CapacityError,
    ConfigurationError,
    DegenerateIntegralError,
    DimensionMismatchError,
    InadmissibleConfigError,
    InadmissibleParametersError,
    NotOnBoundaryError,
    NoWitnessError,
    SingularOperatorError,
    WickError,
)
from .hermite import hermite_eval, hermite_linearize, multiindex_combinatorics
from .inequality import (
    EigRecord,
    EigReport,
    HolderConfig,
    check_admissible,
    check_corollary,
    equivalent_condition,
    jensen_identity_check,
    max_admissible_r,
    nelson_check,
    probe_exponent,
    sharpness_probe,
    verify_inequality,
    verify_weighted_inequality,
)
from .operators import DiagonalOperator
from .quadrature import (
    QuadratureRule,
    gauss_hermite_rule,
    gaussian_integral_closed_form,
    lp_norm_quadrature,
    mc_lp_norm,
)
from .representation import construct_pqrs, corollary_pr, repr_check, repr_rhs

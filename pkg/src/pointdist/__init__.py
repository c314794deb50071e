"""Planar fields with a point singularity: exact distributional calculus,
equilibrium and compatibility checks, closed-form point-source stresses and
configurational forces on point defects."""

from .checkers import (
    CheckReport,
    check_compatibility,
    check_equilibrium,
    check_equilibrium_restricted,
    check_incompatibility,
    identify_point_defect,
)
from .coef import Coef, as_coef, parse_coef
from .defect_force import generalized_force, interaction_eshelby, peach_koehler
from .elasticity import (
    IsotropicModuli,
    PointSourceProblem,
    general_point_solution,
    verify_solution,
)
from .field_algebra import (
    Codomain,
    PointPart,
    SingularField,
    SmoothTerm,
    canonical_extension,
    curl,
    curl_curl,
    degree_of_divergence,
    derivative,
    div,
    eval_smooth,
    grad,
    laplacian,
    linear_combine,
    partial_derivative,
    pv_extension_exists,
    restrict,
    scaling_degree,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .quadrature import QuadratureSpec, estimate_scaling_degree, pair
from .testfn import TestFunction, make_w_alpha, rescale_test

__version__ = "0.1.0"

__all__ = [
    "Coef",
    "as_coef",
    "parse_coef",
    "Codomain",
    "PointPart",
    "SingularField",
    "SmoothTerm",
    "canonical_extension",
    "curl",
    "curl_curl",
    "degree_of_divergence",
    "derivative",
    "div",
    "eval_smooth",
    "grad",
    "laplacian",
    "linear_combine",
    "partial_derivative",
    "pv_extension_exists",
    "restrict",
    "scaling_degree",
    "CheckReport",
    "check_compatibility",
    "check_equilibrium",
    "check_equilibrium_restricted",
    "check_incompatibility",
    "identify_point_defect",
    "generalized_force",
    "interaction_eshelby",
    "peach_koehler",
    "IsotropicModuli",
    "PointSourceProblem",
    "general_point_solution",
    "verify_solution",
    "KERNEL_BACKEND",
    "QuadratureSpec",
    "estimate_scaling_degree",
    "pair",
    "TestFunction",
    "make_w_alpha",
    "rescale_test",
    "__version__",
]

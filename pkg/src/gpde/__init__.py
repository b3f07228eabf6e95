"""Symbolic verification kernel for presymplectic gauge PDE models."""

from .algebra import (
    BackgroundTensors,
    DegreeError,
    ForeignGeneratorError,
    GradedAlgebraError,
    Generator,
    LieAlgebraData,
    LieValued,
    Poly,
    Space,
    lie_bracket,
    theta_basis,
    trace_pair,
)
from .cartan import (
    VectorField,
    d_vertical,
    de_rham,
    interior,
    lie_derivative,
    vf_commutator,
)
from .density import (
    BoundaryReduction,
    Section,
    action_density,
    boundary_reduction,
    covariance_residual,
    el_equivalent,
    el_proportional,
    euler_lagrange,
    field_symbol,
    gauge_variation,
    generic_section,
    generic_supersection,
    ghost_sector,
    horizontal_field_differential,
    restrict_to_submanifold,
    theta_top_coefficient,
    total_field_derivative,
)
from .jets import (
    JetModel,
    bv_lagrangian,
    check_bv_identities,
    check_descent,
    prolong,
    theta_coefficients,
    theta_components,
)
from .model import (
    FiberFamily,
    Model,
    ModelBuilder,
    NotExactError,
    check_nilpotency,
    check_presymplectic,
    check_projection,
    check_solution,
    q_square,
    solve_hamiltonian,
    standard_checks,
)
from .parser import (
    DslError,
    builtin_names,
    load_builtin,
    load_model,
    model_to_source,
    parse_model,
)
from .printing import gen_text, poly_latex, poly_text
from .reduction import (
    ReducedModel,
    ReductionError,
    kernel_basis,
    reduce_form,
    strip_theta_volume,
)
from .report import CheckResult, Report

__all__ = [
    "BackgroundTensors",
    "BoundaryReduction",
    "CheckResult",
    "DegreeError",
    "DslError",
    "FiberFamily",
    "ForeignGeneratorError",
    "GradedAlgebraError",
    "Generator",
    "JetModel",
    "LieAlgebraData",
    "LieValued",
    "Model",
    "ModelBuilder",
    "NotExactError",
    "Poly",
    "ReducedModel",
    "ReductionError",
    "Report",
    "Section",
    "Space",
    "VectorField",
    "action_density",
    "boundary_reduction",
    "builtin_names",
    "bv_lagrangian",
    "check_bv_identities",
    "check_descent",
    "check_nilpotency",
    "check_presymplectic",
    "check_projection",
    "check_solution",
    "covariance_residual",
    "d_vertical",
    "de_rham",
    "el_equivalent",
    "el_proportional",
    "euler_lagrange",
    "field_symbol",
    "gauge_variation",
    "gen_text",
    "generic_section",
    "generic_supersection",
    "ghost_sector",
    "horizontal_field_differential",
    "interior",
    "kernel_basis",
    "lie_bracket",
    "lie_derivative",
    "load_builtin",
    "load_model",
    "model_to_source",
    "parse_model",
    "poly_latex",
    "poly_text",
    "prolong",
    "q_square",
    "reduce_form",
    "restrict_to_submanifold",
    "solve_hamiltonian",
    "standard_checks",
    "strip_theta_volume",
    "theta_basis",
    "theta_coefficients",
    "theta_components",
    "theta_top_coefficient",
    "total_field_derivative",
    "trace_pair",
    "vf_commutator",
]

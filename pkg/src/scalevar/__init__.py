"""Discrete calculus of variations for generalized scale-derivative operators."""

from .grid import Grid, Path, StepMismatchError
from .stencils import (
    Stencil,
    StencilDecomposition,
    apply,
    classify,
    decompose,
    named_stencil,
    two_point,
    unit_circle_family_member,
    window,
)
from .leibniz import LeibnizCoefficients, coefficients, leibniz_residual, product_rule_residual
from .lagrangian import (
    GeneralLagrangian,
    QuadraticLagrangian,
    cel_discretized_residual,
    cel_residual,
    del_residual_composed,
    del_residual_general,
    del_residual_quadratic,
    discrete_action,
    evaluate,
    lagrangian_from_json,
    preset,
)
from .solver import (
    BandedSystem,
    CharPolynomial,
    SingularSystemError,
    assemble,
    general_oscillation_test,
    oscillator_char_poly,
    solve_bvp,
    unit_modulus_roots,
)
from .convergence import (
    SweepReport,
    del_convergence_sweep,
    estimate_order,
    kernel_bound_check,
    operator_consistency_sweep,
)

__version__ = "0.1.0"

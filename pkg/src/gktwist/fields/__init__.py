"""Exact-derivative fields on coordinate charts and the Courant calculus."""

from .chart import Chart, ChartMismatchError, DomainError
from .expr import (
    Const, ExprSyntaxError, FieldExpr, UnboundVariableError, Var, as_expr, cos,
    derivatives, diff, evaluate, evaluate_many, exp, free_variables, parse, sin,
    sqrt, substitute, to_string,
)
from .jet import Jet
from .calculus import (
    Form, Section, StructureError, StructureField, almost_complex_nijenhuis,
    b_transform_field, check_structure, complex_structure_field, courant_bracket,
    courant_pointwise, evaluate_array, exterior_derivative, interior_product,
    lie_bracket, lie_bracket_pointwise, lie_derivative_form, neutral_gram,
    nijenhuis_field, nijenhuis_from_jets, nijenhuis_tensor, symplectic_structure_field,
    tensoriality_check,
)

"""Exact arithmetic: rationals, sparse polynomials, rational-function
expressions with zero-testing, and truncated ℏ-series."""

from fractions import Fraction

from .errors import DivisionByZero, ExpansionTooLarge
from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Div,
    Mul,
    ScalarExpr,
    Sub,
    Var,
    as_expr,
    diff,
    evaluate,
    expr_sum,
    from_ratfunc,
    substitute_shift,
    to_str,
    var,
)
from .poly import Poly, as_fraction, poly_sum
from .ratfunc import RatFunc
from .series import HSeries, series_sum
from .zero import ZeroVerdict, find_witness, is_zero, random_point

Rational = Fraction


def eval(expr, point):  # noqa: A001 - mirrors the operation name
    return evaluate(as_expr(expr), point)


__all__ = [
    "Add", "Const", "Div", "DivisionByZero", "ExpansionTooLarge", "Fraction", "HSeries", "Mul",
    "ONE", "Poly", "RatFunc", "Rational", "ScalarExpr", "Sub", "Var", "ZERO", "ZeroVerdict",
    "as_expr", "as_fraction", "diff", "eval", "evaluate", "expr_sum", "find_witness",
    "from_ratfunc", "is_zero", "poly_sum", "random_point", "series_sum", "substitute_shift",
    "to_str", "var",
]

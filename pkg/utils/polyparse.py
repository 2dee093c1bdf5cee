# utils/polyparse.py
from __future__ import annotations

from typing import Sequence

from sympy import Poly, Symbol, sympify
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from utils.errors import SchemaError

_TRANSFORMS = standard_transformations + (convert_xor, implicit_multiplication_application)


def parse_polynomial(text: str, names: Sequence[str]):
    """Parse `2*t0^2 - t0 t1` style input into a sympy expression in `names`."""
    raw = str(text or "").strip()
    if not raw:
        raise SchemaError("empty polynomial string")
    local = {n: Symbol(n) for n in names}
    try:
        expr = parse_expr(raw, local_dict=local, transformations=_TRANSFORMS)
    except Exception as e:
        raise SchemaError(f"cannot parse polynomial {raw!r}: {e!r}")
    extra = {str(s) for s in expr.free_symbols} - set(names)
    if extra:
        raise SchemaError(f"unknown symbols {sorted(extra)} in {raw!r}")
    return expr


def parse_binary_form(text: str, degree: int) -> list:
    """Coefficient list [c_0..c_d] with c_i the coefficient of t0^(d-i) t1^i."""
    expr = parse_polynomial(text, ("t0", "t1"))
    t0, t1 = Symbol("t0"), Symbol("t1")
    if degree < 0:
        if sympify(expr) != 0:
            raise SchemaError(f"entry {text!r} must vanish (negative forced degree {degree})")
        return []
    poly = Poly(expr, t0, t1)
    if not poly.is_zero:
        if not poly.is_homogeneous or poly.total_degree() != degree:
            raise SchemaError(f"entry {text!r} is not a form of degree {degree}")
    return [poly.coeff_monomial(t0 ** (degree - i) * t1 ** i) for i in range(degree + 1)]


def format_expr(expr) -> str:
    return str(expr).replace("**", "^")

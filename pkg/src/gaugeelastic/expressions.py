"""
Small analytic expression language for configuration fields.

Expressions are parsed with sympy over the coordinates ``x``, ``y`` and time
``t`` plus ``sin``, ``cos``, ``exp``, ``sqrt``, ``pi`` and polynomials.
Derived quantities (pre-strain, connection, background velocity) are
differentiated symbolically before being sampled, so adding a constant to
``u0`` changes none of them, not even in the last bit.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import sympy

from .fields import GridSpec, MaterialModel, PreState, div, hooke_pre_stress

COORDS = sympy.symbols("x y")
TIME = sympy.Symbol("t")
_ALLOWED_FUNCS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp, "sqrt": sympy.sqrt,
                  "tanh": sympy.tanh, "pi": sympy.pi}


class ExpressionError(ValueError):
    pass


def parse_expression(text, dim=2):
    """Parse ``text`` into a sympy expression, rejecting unknown names."""
    if isinstance(text, (int, float)):
        return sympy.Float(text) if isinstance(text, float) else sympy.Integer(text)
    if not isinstance(text, str):
        raise ExpressionError(f"expected a number or an expression string, got {type(text).__name__}")
    names = dict(_ALLOWED_FUNCS)
    names.update({str(c): c for c in COORDS[:dim]})
    names["t"] = TIME
    try:
        expr = sympy.sympify(text, locals=names, rational=False)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc}") from None
    allowed = set(COORDS[:dim]) | {TIME}
    extra = expr.free_symbols - allowed
    if extra:
        raise ExpressionError(f"unknown symbol(s) {sorted(map(str, extra))} in {text!r}; "
                              f"allowed: {sorted(map(str, allowed))}")
    bad = {f.func.__name__ for f in expr.atoms(sympy.Function)
           if f.func not in (sympy.sin, sympy.cos, sympy.exp, sympy.tanh)}
    if bad:
        raise ExpressionError(f"unsupported function(s) {sorted(bad)} in {text!r}")
    return expr


def sample(expr, grid: GridSpec, t=0.0):
    """Evaluate a sympy expression on the grid nodes at time ``t``."""
    syms = list(COORDS[: grid.dim]) + [TIME]
    fn = sympy.lambdify(syms, expr, modules="numpy")
    X = grid.coords()
    with np.errstate(all="ignore"):
        val = np.asarray(fn(*X, t), dtype=float)
    out = np.broadcast_to(val, grid.shape).astype(float)
    if not np.all(np.isfinite(out)):
        raise ExpressionError(f"{expr} is not finite on the grid")
    return out


def sample_components(texts: Sequence, grid: GridSpec, t=0.0):
    exprs = [parse_expression(s, grid.dim) for s in texts]
    return np.stack([sample(e, grid, t) for e in exprs])


def prestate_from_expressions(u0_texts: Sequence, material: MaterialModel, grid: GridSpec,
                              t0=0.0):
    """Pre-state from an analytic u0(x, t): G0, Gamma and v0 by symbolic differentiation."""
    d = grid.dim
    if len(u0_texts) != d:
        raise ExpressionError(f"u0 needs {d} components, got {len(u0_texts)}")
    u0 = [parse_expression(s, d) for s in u0_texts]
    X = COORDS[:d]
    G0 = np.stack([np.stack([sample(sympy.diff(u0[i], X[j]), grid, t0) for j in range(d)])
                   for i in range(d)])
    Gamma = np.stack([np.stack([np.stack([sample(sympy.diff(u0[i], X[j], X[k]), grid, t0)
                                          for k in range(d)]) for j in range(d)])
                      for i in range(d)])
    v0 = np.stack([sample(sympy.diff(u0[i], TIME), grid, t0) for i in range(d)])
    u0_vals = np.stack([sample(e, grid, t0) for e in u0])
    sigma0 = hooke_pre_stress(material.C, G0)
    return PreState(sigma0=sigma0, v0=v0, fbar0=-div(sigma0, grid), u0=u0_vals, G0=G0,
                    Gamma=Gamma, derived=True)


def prestate_from_stress_expressions(sigma_texts, v0_texts, grid: GridSpec):
    """Pre-state measured directly: sigma0 (d x d nested list) and v0 (d list)."""
    d = grid.dim
    if len(sigma_texts) != d or any(len(row) != d for row in sigma_texts):
        raise ExpressionError(f"sigma0 must be a {d}x{d} nested list")
    sigma0 = np.stack([sample_components(row, grid) for row in sigma_texts])
    v0 = sample_components(v0_texts, grid)
    return PreState.from_stress(sigma0, v0, grid)

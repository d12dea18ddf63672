"""Tree-walking evaluator for reaction scripts.

All side effects go through the reaction context, which enforces the
reaction's declared signature.
"""

from __future__ import annotations

import math

from ..errors import ReactorError
from . import ast

ARITY = {
    "sin": 1, "cos": 1, "sqrt": 1, "abs": 1, "sign": 1,
    "min": 2, "max": 2, "sat": 3,
    "time": 0,
}
PORT_FUNCTIONS = ("get", "is_present")


def _div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def _sign(x: float) -> float:
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def _sqrt(x: float) -> float:
    return math.sqrt(x) if x >= 0 else math.nan


def _sat(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


_MATH = {
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": _sqrt,
    "abs": abs,
    "sign": _sign,
    "min": min,
    "max": max,
    "sat": _sat,
}

_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _real(v):
    if isinstance(v, tuple):
        raise ReactorError("vector value used where a real is required")
    return v


def evaluate(e, ctx):
    if isinstance(e, ast.Num):
        return e.value
    if isinstance(e, ast.DurationLit):
        return e.nanos / 1e9
    if isinstance(e, ast.Name):
        return ctx.read_var(e.id)
    if isinstance(e, ast.Binary):
        op = e.op
        if op == "&&":
            return 1.0 if _real(evaluate(e.left, ctx)) and _real(evaluate(e.right, ctx)) else 0.0
        if op == "||":
            return 1.0 if _real(evaluate(e.left, ctx)) or _real(evaluate(e.right, ctx)) else 0.0
        a = _real(evaluate(e.left, ctx))
        b = _real(evaluate(e.right, ctx))
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return _div(a, b)
        return 1.0 if _CMP[op](a, b) else 0.0
    if isinstance(e, ast.Unary):
        v = _real(evaluate(e.operand, ctx))
        return -v if e.op == "-" else (0.0 if v else 1.0)
    if isinstance(e, ast.Call):
        f = e.func
        if f == "get":
            index = None
            if len(e.args) > 1:
                index = _index(evaluate(e.args[1], ctx))
            return ctx.get_port(str(e.args[0]), index)
        if f == "is_present":
            return 1.0 if ctx.is_present(str(e.args[0])) else 0.0
        if f == "time":
            return ctx.time_seconds()
        args = [_real(evaluate(a, ctx)) for a in e.args]
        return float(_MATH[f](*args))
    if isinstance(e, ast.Ref):
        raise ReactorError(f"'{e}' can only be read through get()")
    raise TypeError(f"cannot evaluate {e!r}")


def _index(v) -> int:
    v = _real(v)
    if not math.isfinite(v) or v != int(v):
        raise ReactorError(f"vector index {v} is not an integer")
    return int(v)


def _duration_nanos(e, ctx) -> int:
    if isinstance(e, ast.DurationLit):
        return e.nanos
    seconds = _real(evaluate(e, ctx))
    if not math.isfinite(seconds) or seconds < 0:
        raise ReactorError(f"invalid schedule delay {seconds} s")
    return round(seconds * 1e9)


def execute(stmts, ctx) -> None:
    for s in stmts:
        if isinstance(s, ast.Assign):
            ctx.write_state(s.target, _real(evaluate(s.value, ctx)))
        elif isinstance(s, ast.SetPort):
            index = None if s.index is None else _index(evaluate(s.index, ctx))
            ctx.set_port(str(s.port), evaluate(s.value, ctx), index)
        elif isinstance(s, ast.Schedule):
            ctx.schedule_action(str(s.action), _duration_nanos(s.delay, ctx))
        elif isinstance(s, ast.SetMode):
            ctx.set_mode(s.mode)
        elif isinstance(s, ast.If):
            if _real(evaluate(s.cond, ctx)):
                execute(s.then, ctx)
            else:
                execute(s.orelse, ctx)
        else:
            raise TypeError(f"cannot execute {s!r}")


def eval_reaction(script: ast.Script, ctx) -> None:
    execute(script.body, ctx)

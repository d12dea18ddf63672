"""Render a syntax tree back to ``.lfm`` source."""

from __future__ import annotations

from ..timecore import format_duration
from . import ast

_PREC = {"||": 1, "&&": 2, "<": 3, "<=": 3, ">": 3, ">=": 3, "==": 3, "!=": 3,
         "+": 4, "-": 4, "*": 5, "/": 5}


def _num(v: float) -> str:
    return repr(float(v))


def _time(tv: ast.TimeValue) -> str:
    if tv.param is not None:
        return tv.param
    return format_duration(tv.nanos) if tv.nanos else "0"


def print_expr(e, parent: int = 0) -> str:
    if isinstance(e, ast.Num):
        s = _num(e.value)
        return f"({s})" if s.startswith("-") else s
    if isinstance(e, ast.DurationLit):
        return format_duration(e.nanos) if e.nanos else "0 sec"
    if isinstance(e, ast.Name):
        return e.id
    if isinstance(e, ast.Ref):
        return str(e)
    if isinstance(e, ast.Call):
        return f"{e.func}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, ast.Unary):
        return f"{e.op}{print_expr(e.operand, 6)}"
    if isinstance(e, ast.Binary):
        p = _PREC[e.op]
        # left-associative chains; comparisons do not chain at all
        lp = p + 1 if p == 3 else p
        s = f"{print_expr(e.left, lp)} {e.op} {print_expr(e.right, p + 1)}"
        return f"({s})" if p < parent else s
    raise TypeError(f"not an expression: {e!r}")


def print_stmts(stmts, indent: str) -> list[str]:
    out = []
    for s in stmts:
        if isinstance(s, ast.Assign):
            out.append(f"{indent}{s.target} = {print_expr(s.value)};")
        elif isinstance(s, ast.SetPort):
            idx = f"{print_expr(s.index)}, " if s.index is not None else ""
            out.append(f"{indent}set({s.port}, {idx}{print_expr(s.value)});")
        elif isinstance(s, ast.Schedule):
            out.append(f"{indent}schedule({s.action}, {print_expr(s.delay)});")
        elif isinstance(s, ast.SetMode):
            out.append(f"{indent}set_mode({s.mode});")
        elif isinstance(s, ast.If):
            out.append(f"{indent}if ({print_expr(s.cond)}) {{")
            out.extend(print_stmts(s.then, indent + "    "))
            if s.orelse:
                out.append(f"{indent}}} else {{")
                out.extend(print_stmts(s.orelse, indent + "    "))
            out.append(f"{indent}}}")
        else:
            raise TypeError(f"not a statement: {s!r}")
    return out


def _element(e, indent: str) -> list[str]:
    if isinstance(e, ast.PortDecl):
        ty = "real" if e.width is None else f"real[{e.width}]"
        return [f"{indent}{e.direction} {e.name}: {ty};"]
    if isinstance(e, ast.StateDecl):
        init = e.init if isinstance(e.init, str) else _num(e.init)
        prefix = "reset " if e.reset else ""
        return [f"{indent}{prefix}state {e.name}: real = {init};"]
    if isinstance(e, ast.TimerDecl):
        return [f"{indent}timer {e.name}({_time(e.offset)}, {_time(e.period)});"]
    if isinstance(e, ast.ActionDecl):
        return [f"{indent}{e.kind} action {e.name}({_time(e.min_delay)});"]
    if isinstance(e, ast.ReactionDecl):
        head = f"{indent}reaction({', '.join(str(t) for t in e.triggers)})"
        if e.sources:
            head += " " + ", ".join(str(s) for s in e.sources)
        if e.effects:
            head += " -> " + ", ".join(str(x) for x in e.effects)
        if isinstance(e.body, ast.Extern):
            return [f'{head} extern "{e.body.key}";']
        lines = [head + " {="]
        lines.extend(print_stmts(e.body.body, indent + "    "))
        lines.append(f"{indent}=}}")
        return lines
    if isinstance(e, ast.ModeDecl):
        lines = [f"{indent}{'initial ' if e.initial else ''}mode {e.name} {{"]
        for sub in e.elements:
            lines.extend(_element(sub, indent + "    "))
        lines.append(f"{indent}}}")
        return lines
    if isinstance(e, ast.Instantiation):
        args = ", ".join(
            f"{k} = {format_duration(v) if isinstance(v, int) else _num(v)}" for k, v in e.args
        )
        return [f"{indent}{e.name} = new {e.cls}({args});"]
    if isinstance(e, ast.ConnectionDecl):
        after = f" after {_time(e.delay)}" if e.delay is not None else ""
        return [f"{indent}{e.src} -> {e.dst}{after};"]
    raise TypeError(f"unknown element {e!r}")


def print_program(program: ast.Program) -> str:
    lines = []
    if program.target:
        lines.append(f"target {program.target};")
        lines.append("")
    for r in program.reactors:
        head = "main reactor" if r.is_main else "reactor"
        params = ""
        if r.params:
            parts = []
            for p in r.params:
                if p.kind == "time":
                    parts.append(f"{p.name}: time = {format_duration(p.default) if p.default else '0'}")
                else:
                    parts.append(f"{p.name}: real = {_num(p.default)}")
            params = "(" + ", ".join(parts) + ")"
        lines.append(f"{head} {r.name}{params} {{")
        for e in r.elements:
            lines.extend(_element(e, "    "))
        lines.append("}")
        lines.append("")
    return "\n".join(lines)

"""Static checks on parsed programs.

Structural rules are checked here on the syntax tree; causality and
multi-writer checks need the elaborated instance graph and are delegated
to :mod:`modal_reactors.graph` once the tree itself is clean.
"""

from __future__ import annotations

from ..errors import Diagnostic
from . import ast
from .script import ARITY, PORT_FUNCTIONS


class _Scope:
    """Names visible to elements declared at reactor level or in one mode."""

    def __init__(self, reactor: ast.ReactorDecl, mode: ast.ModeDecl | None):
        self.reactor = reactor
        self.mode = mode

        def collect(kind):
            found = {e.name: e for e in reactor._of(kind)}
            if mode is not None:
                found.update({e.name: e for e in mode._of(kind)})
            return found

        self.ports = {p.name: p for p in reactor.ports}
        self.timers = collect(ast.TimerDecl)
        self.actions = collect(ast.ActionDecl)
        self.states = collect(ast.StateDecl)
        self.instances = collect(ast.Instantiation)
        self.params = {p.name: p for p in reactor.params}
        self.modes = {m.name for m in reactor.modes}


class Validator:
    def __init__(self, program: ast.Program):
        self.program = program
        self.diags: list[Diagnostic] = []
        self.classes = {r.name: r for r in program.reactors}

    def error(self, code: str, message: str, loc=None) -> None:
        self.diags.append(Diagnostic(code, message, loc))

    def run(self) -> list[Diagnostic]:
        mains = [r for r in self.program.reactors if r.is_main]
        if len(mains) != 1:
            loc = mains[1].loc if len(mains) > 1 else None
            self.error("MAIN_COUNT", f"expected exactly one main reactor, found {len(mains)}", loc)
        seen = set()
        for r in self.program.reactors:
            if r.name in seen:
                self.error("DUPLICATE_NAME", f"reactor '{r.name}' defined twice", r.loc)
            seen.add(r.name)
        for r in self.program.reactors:
            self.reactor(r)
        self.instantiation_cycles()
        return self.diags

    # -- structure -----------------------------------------------------------

    def reactor(self, r: ast.ReactorDecl) -> None:
        top_names: dict[str, object] = {}
        for p in r.params:
            self._declare(top_names, p.name, p, r.name)
        for e in r.elements:
            if isinstance(e, (ast.PortDecl, ast.StateDecl, ast.TimerDecl,
                              ast.ActionDecl, ast.Instantiation)):
                self._declare(top_names, e.name, e, r.name)

        mode_names: set[str] = set()
        initials = []
        for m in r.modes:
            if m.name in mode_names:
                self.error("DUPLICATE_MODE", f"mode '{m.name}' declared twice in reactor '{r.name}'", m.loc)
            mode_names.add(m.name)
            if m.initial:
                initials.append(m)
            local = dict(top_names)
            for e in m.elements:
                if isinstance(e, ast.PortDecl):
                    self.error("PORT_IN_MODE",
                               f"port '{e.name}' declared in mode '{m.name}'; ports belong to the reactor",
                               e.loc)
                elif isinstance(e, ast.ModeDecl):
                    self.error("MODE_NESTED",
                               f"mode '{e.name}' nested directly in mode '{m.name}'; "
                               "instantiate a modal reactor instead", e.loc)
                elif isinstance(e, (ast.StateDecl, ast.TimerDecl, ast.ActionDecl, ast.Instantiation)):
                    self._declare(local, e.name, e, r.name)
        if r.modes and len(initials) != 1:
            loc = initials[1].loc if len(initials) > 1 else r.loc
            self.error("INITIAL_COUNT",
                       f"reactor '{r.name}' must mark exactly one mode initial, found {len(initials)}",
                       loc)

        self.scoped_elements(r, _Scope(r, None), r.elements)
        for m in r.modes:
            self.scoped_elements(r, _Scope(r, m), m.elements)

    def _declare(self, table: dict, name: str, element, reactor: str) -> None:
        if name in table:
            self.error("DUPLICATE_NAME", f"'{name}' declared twice in reactor '{reactor}'",
                       getattr(element, "loc", None))
        table[name] = element

    def scoped_elements(self, r: ast.ReactorDecl, scope: _Scope, elements: list) -> None:
        for e in elements:
            if isinstance(e, ast.TimerDecl):
                self.time_value(scope, e.offset, e.loc)
                self.time_value(scope, e.period, e.loc)
            elif isinstance(e, ast.ActionDecl):
                self.time_value(scope, e.min_delay, e.loc)
            elif isinstance(e, ast.StateDecl):
                if isinstance(e.init, str):
                    p = scope.params.get(e.init)
                    if p is None or p.kind != "real":
                        self.error("UNKNOWN_REF", f"state '{e.name}' initialised from unknown real parameter '{e.init}'", e.loc)
            elif isinstance(e, ast.Instantiation):
                self.instantiation(e)
            elif isinstance(e, ast.ConnectionDecl):
                self.connection(scope, e)
            elif isinstance(e, ast.ReactionDecl):
                self.reaction(scope, e)

    def time_value(self, scope: _Scope, tv: ast.TimeValue, loc) -> None:
        if tv.param is not None:
            p = scope.params.get(tv.param)
            if p is None or p.kind != "time":
                self.error("UNKNOWN_REF", f"'{tv.param}' is not a time parameter", loc)

    def instantiation(self, e: ast.Instantiation) -> None:
        cls = self.classes.get(e.cls)
        if cls is None:
            self.error("UNKNOWN_CLASS", f"no reactor class named '{e.cls}'", e.loc)
            return
        if cls.is_main:
            self.error("UNKNOWN_CLASS", f"the main reactor '{e.cls}' cannot be instantiated", e.loc)
        params = {p.name: p for p in cls.params}
        given = set()
        for name, value in e.args:
            p = params.get(name)
            if p is None:
                self.error("PARAM", f"reactor '{e.cls}' has no parameter '{name}'", e.loc)
                continue
            if name in given:
                self.error("PARAM", f"parameter '{name}' given twice", e.loc)
            given.add(name)
            if (p.kind == "time") != isinstance(value, int):
                self.error("PARAM", f"parameter '{name}' of '{e.cls}' expects a {p.kind} value", e.loc)

    def instantiation_cycles(self) -> None:
        def children(r: ast.ReactorDecl):
            out = [i.cls for i in r.instances]
            for m in r.modes:
                out.extend(i.cls for i in m.instances)
            return out

        state: dict[str, int] = {}

        def visit(name: str, path: list[str]) -> None:
            state[name] = 1
            r = self.classes.get(name)
            for child in children(r) if r else []:
                if state.get(child) == 1:
                    cyc = " -> ".join(path[path.index(child):] + [child])
                    self.error("RECURSIVE_INSTANCE", f"reactor instantiates itself: {cyc}", r.loc)
                elif child in self.classes and child not in state:
                    visit(child, path + [child])
            state[name] = 2

        for r in self.program.reactors:
            if r.name not in state:
                visit(r.name, [r.name])

    # -- references ----------------------------------------------------------

    def _port(self, scope: _Scope, ref: ast.Ref, own_dir: str, child_dir: str):
        """Resolve a port reference; returns (PortDecl | None, reason)."""
        if ref.container is None:
            p = scope.ports.get(ref.name)
            if p is None:
                return None, f"unknown port '{ref}'"
            if p.direction != own_dir:
                return None, f"'{ref}' is an {p.direction} of this reactor"
            return p, ""
        inst = scope.instances.get(ref.container)
        if inst is None:
            return None, f"unknown reactor instance '{ref.container}'"
        cls = self.classes.get(inst.cls)
        if cls is None:
            return None, f"unknown reactor instance '{ref.container}'"
        for p in cls.ports:
            if p.name == ref.name:
                if p.direction != child_dir:
                    return None, f"'{ref}' is an {p.direction} of '{ref.container}'"
                return p, ""
        return None, f"'{inst.cls}' has no port '{ref.name}'"

    def connection(self, scope: _Scope, c: ast.ConnectionDecl) -> None:
        src, why_src = self._port(scope, c.src, "input", "output")
        dst, why_dst = self._port(scope, c.dst, "output", "input")
        if src is None:
            self.error("UNKNOWN_REF", f"bad connection source: {why_src}", c.loc)
        if dst is None:
            self.error("UNKNOWN_REF", f"bad connection destination: {why_dst}", c.loc)
        if src is not None and dst is not None and src.width != dst.width:
            self.error("TYPE_MISMATCH",
                       f"connection {c.src} -> {c.dst} joins {_type(src)} to {_type(dst)}", c.loc)
        if c.delay is not None:
            self.time_value(scope, c.delay, c.loc)

    def reaction(self, scope: _Scope, rx: ast.ReactionDecl) -> None:
        readable: dict[str, object] = {}
        for t in rx.triggers:
            if t.is_special:
                readable[t.name] = t.name
                continue
            if t.container is None and t.name in scope.timers:
                readable[t.name] = scope.timers[t.name]
                continue
            if t.container is None and t.name in scope.actions:
                readable[t.name] = scope.actions[t.name]
                continue
            p, why = self._port(scope, t, "input", "output")
            if p is None:
                self.error("UNKNOWN_REF", f"bad trigger: {why}", t.loc or rx.loc)
            else:
                readable[str(t)] = p
        for s in rx.sources:
            p, why = self._port(scope, s, "input", "output")
            if p is None:
                self.error("UNKNOWN_REF", f"bad source: {why}", s.loc or rx.loc)
            else:
                readable[str(s)] = p

        port_effects: dict[str, ast.PortDecl] = {}
        action_effects: dict[str, ast.ActionDecl] = {}
        mode_effects: dict[str, str] = {}
        for eff in rx.effects:
            if isinstance(eff, ast.ModeEffect):
                if eff.mode not in scope.modes:
                    self.error("UNKNOWN_MODE", f"reactor '{scope.reactor.name}' has no mode '{eff.mode}'",
                               eff.loc or rx.loc)
                elif eff.mode in mode_effects and mode_effects[eff.mode] != eff.kind:
                    self.error("DUPLICATE_NAME", f"mode '{eff.mode}' listed with two transition kinds",
                               eff.loc or rx.loc)
                mode_effects[eff.mode] = eff.kind
                continue
            if eff.container is None and eff.name in scope.actions:
                action_effects[eff.name] = scope.actions[eff.name]
                continue
            p, why = self._port(scope, eff, "output", "input")
            if p is None:
                self.error("UNKNOWN_REF", f"bad effect: {why}", eff.loc or rx.loc)
            else:
                port_effects[str(eff)] = p

        if mode_effects and any(t.is_special and t.name == "shutdown" for t in rx.triggers):
            self.error("SHUTDOWN_SET_MODE", "a shutdown reaction may not declare mode transitions", rx.loc)

        if isinstance(rx.body, ast.Script):
            checker = _ScriptChecker(self, scope, readable, port_effects, action_effects, mode_effects)
            checker.stmts(rx.body.body)


def _type(p: ast.PortDecl) -> str:
    return "real" if p.width is None else f"real[{p.width}]"


class _ScriptChecker:
    def __init__(self, v: Validator, scope: _Scope, readable, ports, actions, modes):
        self.v = v
        self.scope = scope
        self.readable = readable
        self.ports = ports
        self.actions = actions
        self.modes = modes

    def stmts(self, stmts) -> None:
        for s in stmts:
            self.stmt(s)

    def stmt(self, s) -> None:
        v = self.v
        if isinstance(s, ast.Assign):
            if s.target not in self.scope.states:
                code = "ASSIGN_PARAM" if s.target in self.scope.params else "UNKNOWN_NAME"
                v.error(code, f"'{s.target}' is not a state variable in scope", s.loc)
            self.expr(s.value)
        elif isinstance(s, ast.SetPort):
            port = self.ports.get(str(s.port))
            if port is None:
                v.error("UNDECLARED_EFFECT", f"set({s.port}) but '{s.port}' is not a declared port effect", s.loc)
            elif s.index is not None:
                if port.width is None:
                    v.error("INDEX_ON_SCALAR", f"'{s.port}' is a scalar port", s.loc)
                elif isinstance(s.index, ast.Num) and not 0 <= s.index.value < port.width:
                    v.error("INDEX_RANGE", f"index {s.index.value:g} out of range for '{s.port}'", s.loc)
            if s.index is not None:
                self.expr(s.index)
            self.expr(s.value)
        elif isinstance(s, ast.Schedule):
            act = self.actions.get(str(s.action))
            if act is None:
                v.error("UNDECLARED_EFFECT", f"schedule({s.action}) but '{s.action}' is not a declared action effect", s.loc)
            elif act.kind == "physical":
                v.error("SCHEDULE_PHYSICAL", f"physical action '{s.action}' cannot be scheduled from a reaction", s.loc)
            self.expr(s.delay)
        elif isinstance(s, ast.SetMode):
            if s.mode not in self.modes:
                v.error("UNDECLARED_MODE_EFFECT",
                        f"set_mode({s.mode}) but mode '{s.mode}' is not declared as an effect", s.loc)
        elif isinstance(s, ast.If):
            self.expr(s.cond)
            self.stmts(s.then)
            self.stmts(s.orelse)

    def expr(self, e) -> None:
        v = self.v
        if isinstance(e, ast.Name):
            if e.id not in self.scope.states and e.id not in self.scope.params:
                v.error("UNKNOWN_NAME", f"unknown name '{e.id}'", e.loc)
        elif isinstance(e, ast.Ref):
            v.error("UNKNOWN_NAME", f"'{e}' can only be read through get()", e.loc)
        elif isinstance(e, ast.Unary):
            self.expr(e.operand)
        elif isinstance(e, ast.Binary):
            self.expr(e.left)
            self.expr(e.right)
        elif isinstance(e, ast.Call):
            if e.func in PORT_FUNCTIONS:
                nargs = (1, 2) if e.func == "get" else (1,)
                if len(e.args) not in nargs:
                    v.error("ARITY", f"{e.func}() takes {' or '.join(map(str, nargs))} arguments", e.loc)
                    return
                ref = e.args[0]
                target = self.readable.get(str(ref))
                if target is None or isinstance(target, (str, ast.TimerDecl)) and e.func == "get":
                    v.error("UNDECLARED_SOURCE",
                            f"{e.func}({ref}) but '{ref}' is not a declared trigger or source", e.loc)
                elif len(e.args) == 2:
                    if not isinstance(target, ast.PortDecl) or target.width is None:
                        v.error("INDEX_ON_SCALAR", f"'{ref}' is not a vector port", e.loc)
                    else:
                        idx = e.args[1]
                        if isinstance(idx, ast.Num) and not 0 <= idx.value < target.width:
                            v.error("INDEX_RANGE", f"index {idx.value:g} out of range for '{ref}'", e.loc)
                        self.expr(idx)
                return
            if e.func not in ARITY:
                v.error("UNKNOWN_FUNCTION", f"unknown function '{e.func}'", e.loc)
            elif len(e.args) != ARITY[e.func]:
                v.error("ARITY", f"{e.func}() takes {ARITY[e.func]} arguments, got {len(e.args)}", e.loc)
            for a in e.args:
                self.expr(a)


def validate(program: ast.Program, graph_checks: bool = True) -> list[Diagnostic]:
    """Return every diagnostic for ``program`` (empty when it is acceptable)."""
    diags = Validator(program).run()
    if diags or not graph_checks:
        return diags
    from ..graph import analyze
    from ..runtime.instance import elaborate

    return analyze(elaborate(program)).diagnostics

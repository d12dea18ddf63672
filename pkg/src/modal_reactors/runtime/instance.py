"""Elaboration of a parsed program into a tree of reactor instances.

Every runtime element (timer, action, reaction, connection, state
variable) records its innermost enclosing mode: the mode it is declared in
within its own reactor, or else the mode its reactor instance was created
in, and so on upward. ``None`` means the element is never suspended.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dsl import ast
from ..errors import ReactorError
from ..timecore import ZERO_TAG, Tag


class ModeInstance:
    def __init__(self, decl: ast.ModeDecl, reactor: ReactorInstance):
        self.decl = decl
        self.name = decl.name
        self.reactor = reactor
        self.is_initial = decl.initial
        self.leave_time: Tag = ZERO_TAG
        self.reset_pending = False
        self.had_startup = False

    @property
    def parent(self) -> ModeInstance | None:
        return self.reactor.parent_mode

    @property
    def qname(self) -> str:
        return f"{self.reactor.qname}.{self.name}"

    def ancestors(self):
        """This mode followed by every enclosing mode, innermost first."""
        m = self
        while m is not None:
            yield m
            m = m.reactor.parent_mode

    def __repr__(self) -> str:
        return f"<mode {self.qname}>"


def mode_chain(mode: ModeInstance | None) -> list[ModeInstance]:
    return [] if mode is None else list(mode.ancestors())


class PortInstance:
    def __init__(self, decl: ast.PortDecl, owner: ReactorInstance):
        self.decl = decl
        self.name = decl.name
        self.owner = owner
        self.width = decl.width
        self.direction = decl.direction
        self.value = 0.0 if decl.width is None else (0.0,) * decl.width
        self.outgoing: list[Connection] = []
        self.triggers: list[ReactionInstance] = []
        self.readers: list[ReactionInstance] = []

    @property
    def qname(self) -> str:
        return f"{self.owner.qname}.{self.name}"

    def __repr__(self) -> str:
        return f"<port {self.qname}>"


class Trigger:
    """Anything that can carry an event in the queue."""

    kind = "?"
    ordinal = -1


class TimerInstance(Trigger):
    kind = "timer"

    def __init__(self, name: str, owner: ReactorInstance, offset: int, period: int, mode):
        self.name = name
        self.owner = owner
        self.offset = offset
        self.period = period
        self.mode = mode
        self.reactions: list[ReactionInstance] = []

    @property
    def qname(self) -> str:
        return f"{self.owner.qname}.{self.name}"

    def __repr__(self) -> str:
        return f"<timer {self.qname}>"


class ActionInstance(Trigger):
    kind = "action"

    def __init__(self, name: str, owner: ReactorInstance, physical: bool, min_delay: int, mode):
        self.name = name
        self.owner = owner
        self.physical = physical
        self.min_delay = min_delay
        self.mode = mode
        self.reactions: list[ReactionInstance] = []
        self.value = 0.0

    @property
    def qname(self) -> str:
        return f"{self.owner.qname}.{self.name}"

    def __repr__(self) -> str:
        return f"<action {self.qname}>"


class SpecialTrigger(Trigger):
    """startup, shutdown or reset of one mode (or of all modeless scopes)."""

    def __init__(self, kind: str, mode: ModeInstance | None):
        self.kind = kind
        self.mode = mode
        self.reactions: list[ReactionInstance] = []

    def __repr__(self) -> str:
        return f"<{self.kind} {self.mode.qname if self.mode else '*'}>"


@dataclass(eq=False)
class Connection(Trigger):
    src: PortInstance
    dst: PortInstance
    delay: int | None
    mode: ModeInstance | None
    owner: ReactorInstance
    kind: str = "connection"
    ordinal: int = -1

    def __repr__(self) -> str:
        return f"<connection {self.src.qname} -> {self.dst.qname}>"


@dataclass
class StateVar:
    name: str
    initial: float
    reset: bool
    mode: ModeInstance | None


class ReactionInstance:
    def __init__(self, decl: ast.ReactionDecl, owner: ReactorInstance, mode, local_mode):
        self.decl = decl
        self.owner = owner
        self.index = decl.index
        self.mode: ModeInstance | None = mode
        # mode within the owning reactor, for trace output
        self.local_mode: ModeInstance | None = local_mode
        self.triggers: list[Trigger | PortInstance] = []
        self.names: dict[str, object] = {}  # readable triggers and sources
        self.port_effects: dict[str, PortInstance] = {}
        self.action_effects: dict[str, ActionInstance] = {}
        self.mode_effects: dict[str, tuple[ModeInstance, str]] = {}
        self.level = 0
        self.states: dict[str, tuple[str | None, str]] = {}  # name -> storage key

    @property
    def qname(self) -> str:
        return f"{self.owner.qname}#{self.index}"

    @property
    def sort_key(self):
        return (self.level, self.owner.qname, self.index)

    @property
    def is_shutdown(self) -> bool:
        return any(isinstance(t, SpecialTrigger) and t.kind == "shutdown" for t in self.triggers)

    def __repr__(self) -> str:
        return f"<reaction {self.qname}>"


class ReactorInstance:
    def __init__(self, decl: ast.ReactorDecl, name: str, parent: ReactorInstance | None,
                 parent_mode: ModeInstance | None, params: dict):
        self.decl = decl
        self.name = name
        self.parent = parent
        self.parent_mode = parent_mode
        self.params = params
        self.qname = name if parent is None else f"{parent.qname}/{name}"
        self.depth = 0 if parent is None else parent.depth + 1
        self.modes: dict[str, ModeInstance] = {m.name: ModeInstance(m, self) for m in decl.modes}
        self.initial_mode: ModeInstance | None = next(
            (m for m in self.modes.values() if m.is_initial), None)
        self.current_mode = self.initial_mode
        self.next_mode: ModeInstance | None = None
        self.transition: str | None = None  # None | "reset" | "history"
        self.ports: dict[str, PortInstance] = {p.name: PortInstance(p, self) for p in decl.ports}
        self.children: dict[str, ReactorInstance] = {}
        self.timers: list[TimerInstance] = []
        self.actions: list[ActionInstance] = []
        self.reactions: list[ReactionInstance] = []
        self.state_vars: dict[tuple[str | None, str], StateVar] = {}
        self.state: dict[tuple[str | None, str], float] = {}

    @property
    def is_modal(self) -> bool:
        return bool(self.modes)

    def mode_of(self, local: ast.ModeDecl | None) -> ModeInstance | None:
        return self.parent_mode if local is None else self.modes[local.name]

    def __repr__(self) -> str:
        return f"<reactor {self.qname}>"


@dataclass
class ProgramInstance:
    program: ast.Program
    main: ReactorInstance
    reactors: list[ReactorInstance] = field(default_factory=list)  # top-down
    reactions: list[ReactionInstance] = field(default_factory=list)
    timers: list[TimerInstance] = field(default_factory=list)
    actions: list[ActionInstance] = field(default_factory=list)
    connections: list[Connection] = field(default_factory=list)
    specials: dict = field(default_factory=dict)

    @property
    def modal_reactors(self) -> list[ReactorInstance]:
        return [r for r in self.reactors if r.is_modal]

    @property
    def modes(self) -> list[ModeInstance]:
        return [m for r in self.modal_reactors for m in r.modes.values()]

    def special(self, kind: str, mode: ModeInstance | None) -> SpecialTrigger:
        key = (kind, mode)
        if key not in self.specials:
            self.specials[key] = SpecialTrigger(kind, mode)
        return self.specials[key]

    def find(self, qname: str) -> ReactorInstance:
        for r in self.reactors:
            if r.qname == qname:
                return r
        raise KeyError(qname)

    def action(self, qname: str) -> ActionInstance:
        for a in self.actions:
            if a.qname == qname:
                return a
        raise ReactorError(f"unknown action '{qname}'")


def _time(tv: ast.TimeValue, params: dict) -> int:
    return tv.nanos if tv.param is None else params[tv.param]


class _Elaborator:
    def __init__(self, program: ast.Program):
        self.program = program
        self.classes = {r.name: r for r in program.reactors}

    def run(self) -> ProgramInstance:
        main_decl = self.program.main
        if main_decl is None:
            raise ReactorError("program has no main reactor")
        main = self.instantiate(main_decl, main_decl.name, None, None, {})
        out = ProgramInstance(self.program, main)
        stack = [main]
        while stack:
            r = stack.pop(0)
            out.reactors.append(r)
            stack.extend(r.children.values())
        for r in out.reactors:
            self.wire(r, out)
        for kind in ("startup", "shutdown"):
            out.special(kind, None)
        ordinal = 0
        for r in out.reactors:
            for t in r.timers:
                t.ordinal = ordinal
                ordinal += 1
            for a in r.actions:
                a.ordinal = ordinal
                ordinal += 1
            out.timers.extend(r.timers)
            out.actions.extend(r.actions)
            out.reactions.extend(r.reactions)
        for c in out.connections:
            c.ordinal = ordinal
            ordinal += 1
        specials = sorted(out.specials.values(),
                          key=lambda s: (s.kind, s.mode.qname if s.mode else ""))
        for s in specials:
            s.ordinal = ordinal
            ordinal += 1
        return out

    def instantiate(self, decl, name, parent, parent_mode, args) -> ReactorInstance:
        params = {}
        for p in decl.params:
            params[p.name] = args.get(p.name, p.default)
        r = ReactorInstance(decl, name, parent, parent_mode, params)
        for sd, local in decl.scoped(ast.StateDecl):
            init = params[sd.init] if isinstance(sd.init, str) else sd.init
            var = StateVar(sd.name, float(init), sd.reset, r.mode_of(local))
            key = (local.name if local else None, sd.name)
            r.state_vars[key] = var
            r.state[key] = var.initial
        for td, local in decl.scoped(ast.TimerDecl):
            r.timers.append(TimerInstance(td.name, r, _time(td.offset, params),
                                          _time(td.period, params), r.mode_of(local)))
        for ad, local in decl.scoped(ast.ActionDecl):
            r.actions.append(ActionInstance(ad.name, r, ad.kind == "physical",
                                            _time(ad.min_delay, params), r.mode_of(local)))
        for inst, local in decl.scoped(ast.Instantiation):
            cls = self.classes.get(inst.cls)
            if cls is None:
                raise ReactorError(f"unknown reactor class '{inst.cls}'")
            known = {p.name for p in cls.params}
            extra = [k for k, _ in inst.args if k not in known]
            if extra:
                raise ReactorError(f"reactor '{inst.cls}' has no parameter(s) {', '.join(extra)}")
            r.children[inst.name] = self.instantiate(cls, inst.name, r, r.mode_of(local), dict(inst.args))
        return r

    # name resolution within one scope (reactor level plus one mode)

    def _lookup(self, r: ReactorInstance, items, name: str, local):
        for it in items:
            if it.name != name:
                continue
            where = self._local_of(r, it)
            if where is None or (local is not None and where == local.name):
                return it
        return None

    @staticmethod
    def _local_of(r: ReactorInstance, item) -> str | None:
        m = item.mode
        return m.name if m is not None and m.reactor is r else None

    def _child(self, r, name, local) -> ReactorInstance | None:
        child = r.children.get(name)
        if child is None:
            return None
        if child.parent_mode is not None and child.parent_mode.reactor is r:
            if local is None or child.parent_mode.name != local.name:
                return None
        return child

    def _port(self, r, ref: ast.Ref, local) -> PortInstance:
        if ref.container is None:
            p = r.ports.get(ref.name)
        else:
            child = self._child(r, ref.container, local)
            p = child.ports.get(ref.name) if child else None
        if p is None:
            raise ReactorError(f"{r.qname}: cannot resolve port '{ref}'")
        return p

    def wire(self, r: ReactorInstance, out: ProgramInstance) -> None:
        decl = r.decl
        for cd, local in decl.scoped(ast.ConnectionDecl):
            src = self._port(r, cd.src, local)
            dst = self._port(r, cd.dst, local)
            delay = None if cd.delay is None else _time(cd.delay, r.params)
            c = Connection(src, dst, delay, r.mode_of(local), r)
            src.outgoing.append(c)
            out.connections.append(c)

        for rd, local in decl.all_reactions():
            rx = ReactionInstance(rd, r, r.mode_of(local), r.modes[local.name] if local else None)
            for t in rd.triggers:
                if t.is_special:
                    trig = out.special(t.name, rx.mode)
                    rx.names[t.name] = trig
                else:
                    trig = self._lookup(r, r.timers, t.name, local) if t.container is None else None
                    trig = trig or (self._lookup(r, r.actions, t.name, local) if t.container is None else None)
                    if trig is None:
                        trig = self._port(r, t, local)
                        trig.readers.append(rx)
                    rx.names[str(t)] = trig
                trig_list = trig.triggers if isinstance(trig, PortInstance) else trig.reactions
                trig_list.append(rx)
                rx.triggers.append(trig)
            for s in rd.sources:
                p = self._port(r, s, local)
                p.readers.append(rx)
                rx.names[str(s)] = p
            for e in rd.effects:
                if isinstance(e, ast.ModeEffect):
                    rx.mode_effects[e.mode] = (r.modes[e.mode], e.kind)
                    continue
                act = self._lookup(r, r.actions, e.name, local) if e.container is None else None
                if act is not None:
                    rx.action_effects[e.name] = act
                else:
                    rx.port_effects[str(e)] = self._port(r, e, local)
            for (scope, name), var in r.state_vars.items():
                if scope is None or (local is not None and scope == local.name):
                    rx.states[name] = (scope, name)
            r.reactions.append(rx)


def elaborate(program: ast.Program) -> ProgramInstance:
    return _Elaborator(program).run()

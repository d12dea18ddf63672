"""Syntax tree for ``.lfm`` programs and reaction scripts.

Source locations never take part in equality, so two trees compare equal
when they are structurally identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..errors import Location

SPECIAL_TRIGGERS = ("startup", "shutdown", "reset")


def _loc():
    return field(default=None, compare=False, repr=False)


# -- script expressions ------------------------------------------------------


@dataclass
class Num:
    value: float
    loc: Location | None = _loc()


@dataclass
class DurationLit:
    nanos: int
    loc: Location | None = _loc()


@dataclass
class Name:
    id: str
    loc: Location | None = _loc()


@dataclass
class Ref:
    """A port, action, timer or special trigger, optionally through a child."""

    container: str | None
    name: str
    loc: Location | None = _loc()

    def __str__(self) -> str:
        return self.name if self.container is None else f"{self.container}.{self.name}"

    @property
    def is_special(self) -> bool:
        return self.container is None and self.name in SPECIAL_TRIGGERS


@dataclass
class Unary:
    op: str
    operand: Expr
    loc: Location | None = _loc()


@dataclass
class Binary:
    op: str
    left: Expr
    right: Expr
    loc: Location | None = _loc()


@dataclass
class Call:
    func: str
    args: list[Expr]
    loc: Location | None = _loc()


Expr = Union[Num, DurationLit, Name, Ref, Unary, Binary, Call]


# -- script statements -------------------------------------------------------


@dataclass
class Assign:
    target: str
    value: Expr
    loc: Location | None = _loc()


@dataclass
class SetPort:
    port: Ref
    index: Expr | None
    value: Expr
    loc: Location | None = _loc()


@dataclass
class Schedule:
    action: Ref
    delay: Expr
    loc: Location | None = _loc()


@dataclass
class SetMode:
    mode: str
    loc: Location | None = _loc()


@dataclass
class If:
    cond: Expr
    then: list[Stmt]
    orelse: list[Stmt]
    loc: Location | None = _loc()


Stmt = Union[Assign, SetPort, Schedule, SetMode, If]


@dataclass
class Script:
    body: list[Stmt]


@dataclass
class Extern:
    key: str


# -- program structure -------------------------------------------------------


@dataclass
class TimeValue:
    """A duration literal or the name of a time-typed parameter."""

    nanos: int | None = None
    param: str | None = None


@dataclass
class Param:
    name: str
    kind: str  # "real" | "time"
    default: float | int
    loc: Location | None = _loc()


@dataclass
class PortDecl:
    name: str
    direction: str  # "input" | "output"
    width: int | None  # None for a scalar real
    loc: Location | None = _loc()


@dataclass
class StateDecl:
    name: str
    init: float | str  # literal, or a parameter name
    reset: bool = False
    loc: Location | None = _loc()


@dataclass
class TimerDecl:
    name: str
    offset: TimeValue
    period: TimeValue
    loc: Location | None = _loc()


@dataclass
class ActionDecl:
    name: str
    kind: str  # "logical" | "physical"
    min_delay: TimeValue
    loc: Location | None = _loc()


@dataclass
class ModeEffect:
    kind: str  # "reset" | "history"
    mode: str
    loc: Location | None = _loc()

    def __str__(self) -> str:
        return f"{self.kind}({self.mode})"


@dataclass
class ReactionDecl:
    index: int
    triggers: list[Ref]
    sources: list[Ref]
    effects: list[Ref | ModeEffect]
    body: Script | Extern
    loc: Location | None = _loc()

    @property
    def mode_effects(self) -> list[ModeEffect]:
        return [e for e in self.effects if isinstance(e, ModeEffect)]

    @property
    def port_effects(self) -> list[Ref]:
        return [e for e in self.effects if isinstance(e, Ref)]


@dataclass
class Instantiation:
    name: str
    cls: str
    args: list[tuple[str, float | int]]
    loc: Location | None = _loc()


@dataclass
class ConnectionDecl:
    src: Ref
    dst: Ref
    delay: TimeValue | None = None
    loc: Location | None = _loc()


class _Container:
    """Shared accessors for reactor and mode bodies (kept in source order)."""

    elements: list

    def _of(self, kind):
        return [e for e in self.elements if isinstance(e, kind)]

    @property
    def ports(self) -> list[PortDecl]:
        return self._of(PortDecl)

    @property
    def states(self) -> list[StateDecl]:
        return self._of(StateDecl)

    @property
    def timers(self) -> list[TimerDecl]:
        return self._of(TimerDecl)

    @property
    def actions(self) -> list[ActionDecl]:
        return self._of(ActionDecl)

    @property
    def reactions(self) -> list[ReactionDecl]:
        return self._of(ReactionDecl)

    @property
    def instances(self) -> list[Instantiation]:
        return self._of(Instantiation)

    @property
    def connections(self) -> list[ConnectionDecl]:
        return self._of(ConnectionDecl)

    @property
    def modes(self) -> list[ModeDecl]:
        return self._of(ModeDecl)


@dataclass
class ModeDecl(_Container):
    name: str
    initial: bool
    elements: list = field(default_factory=list)
    loc: Location | None = _loc()


@dataclass
class ReactorDecl(_Container):
    name: str
    is_main: bool = False
    params: list[Param] = field(default_factory=list)
    elements: list = field(default_factory=list)
    loc: Location | None = _loc()

    def all_reactions(self) -> list[tuple[ReactionDecl, ModeDecl | None]]:
        """Every reaction with its enclosing mode, in declaration order."""
        out = [(r, None) for r in self.reactions]
        for m in self.modes:
            out.extend((r, m) for r in m.reactions)
        out.sort(key=lambda pair: pair[0].index)
        return out

    def scoped(self, kind) -> list[tuple[object, ModeDecl | None]]:
        out = [(e, None) for e in self._of(kind)]
        for m in self.modes:
            out.extend((e, m) for e in m._of(kind))
        return out

    def mode(self, name: str) -> ModeDecl | None:
        for m in self.modes:
            if m.name == name:
                return m
        return None


@dataclass
class Program:
    reactors: list[ReactorDecl]
    target: str | None = None
    natives: dict = field(default_factory=dict, compare=False, repr=False)
    source_name: str = field(default="<input>", compare=False, repr=False)

    def reactor(self, name: str) -> ReactorDecl | None:
        for r in self.reactors:
            if r.name == name:
                return r
        return None

    @property
    def main(self) -> ReactorDecl | None:
        for r in self.reactors:
            if r.is_main:
                return r
        return None

    def extern_keys(self) -> set[str]:
        return {rx.body.key for r in self.reactors for rx, _ in r.all_reactions()
                if isinstance(rx.body, Extern)}


def bind_native(program: Program, key: str, handler) -> None:
    """Attach a Python callable to the reactions declared ``extern "key"``."""
    if key not in program.extern_keys():
        raise KeyError(f"no reaction is declared extern {key!r}")
    program.natives[key] = handler

"""Tick-by-tick execution of an elaborated program."""

from __future__ import annotations

import heapq
import queue as _queue
import random
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable

from .. import graph, modal
from ..dsl import ast
from ..dsl.script import eval_reaction
from ..errors import ReactorError, ValidationError
from ..timecore import ZERO_TAG, Tag, shift
from .events import Event, EventQueue
from .instance import (
    ActionInstance,
    Connection,
    PortInstance,
    ProgramInstance,
    ReactionInstance,
    SpecialTrigger,
    TimerInstance,
    elaborate,
)
from .trace import Trace, format_value

Handler = Callable[["ReactionContext"], None]


@dataclass
class TickReport:
    tag: Tag
    reactions: list[str] = field(default_factory=list)
    outputs: list[tuple[str, object]] = field(default_factory=list)


class ReactionContext:
    """What a reaction body may touch while it runs."""

    def __init__(self, engine: Engine, rx: ReactionInstance):
        self.engine = engine
        self.reaction = rx
        self.reactor = rx.owner

    @property
    def tag(self) -> Tag:
        return self.engine.current_tag

    @property
    def params(self) -> dict:
        return self.reactor.params

    def time_seconds(self) -> float:
        return self.engine.current_tag.time / 1e9

    # variables

    def read_var(self, name: str) -> float:
        key = self.reaction.states.get(name)
        if key is not None:
            return self.reactor.state[key]
        if name in self.reactor.params:
            v = self.reactor.params[name]
            # time parameters are held in nanoseconds
            return v / 1e9 if self._is_time_param(name) else float(v)
        raise ReactorError(f"{self.reaction.qname}: unknown name '{name}'")

    def _is_time_param(self, name: str) -> bool:
        return any(p.name == name and p.kind == "time" for p in self.reactor.decl.params)

    def write_state(self, name: str, value: float) -> None:
        key = self.reaction.states.get(name)
        if key is None:
            raise ReactorError(f"{self.reaction.qname}: '{name}' is not a state variable")
        self.reactor.state[key] = float(value)

    # ports and actions

    def get_port(self, name: str, index: int | None = None):
        obj = self.reaction.names.get(name)
        if isinstance(obj, PortInstance):
            value = obj.value
        elif isinstance(obj, ActionInstance):
            value = obj.value
        else:
            raise ReactorError(f"{self.reaction.qname}: '{name}' is not a readable port or action")
        if index is None:
            return value
        if not isinstance(value, tuple):
            raise ReactorError(f"{self.reaction.qname}: '{name}' is not a vector")
        if not 0 <= index < len(value):
            raise ReactorError(f"{self.reaction.qname}: index {index} out of range for '{name}'")
        return value[index]

    def is_present(self, name: str) -> bool:
        obj = self.reaction.names.get(name)
        if obj is None:
            raise ReactorError(f"{self.reaction.qname}: '{name}' is not a trigger or source")
        return self.engine.is_present(obj)

    def set_port(self, name: str, value, index: int | None = None) -> None:
        port = self.reaction.port_effects.get(name)
        if port is None:
            raise ReactorError(f"{self.reaction.qname}: port '{name}' is not a declared effect")
        self.engine.write_port(port, _coerce(port, value, index, name), self.reaction)

    def schedule_action(self, name: str, extra_nanos: int = 0, payload=None) -> None:
        act = self.reaction.action_effects.get(name)
        if act is None:
            raise ReactorError(f"{self.reaction.qname}: action '{name}' is not a declared effect")
        if act.physical:
            raise ReactorError(f"{self.reaction.qname}: physical action '{name}' cannot be scheduled")
        if extra_nanos < 0:
            raise ReactorError(f"{self.reaction.qname}: negative delay for '{name}'")
        tag = shift(self.engine.current_tag, Tag(act.min_delay + extra_nanos, 0))
        self.engine.queue.push(Event(tag, act, payload))

    def set_mode(self, name: str) -> None:
        entry = self.reaction.mode_effects.get(name)
        if entry is None:
            raise ReactorError(f"{self.reaction.qname}: mode '{name}' is not a declared effect")
        mode, kind = entry
        self.reactor.next_mode = mode
        self.reactor.transition = kind

    # shorter spellings for native handlers
    get = get_port
    set = set_port
    schedule = schedule_action

    @property
    def state(self) -> dict[str, float]:
        return {n: self.reactor.state[k] for n, k in self.reaction.states.items()}


def _coerce(port: PortInstance, value, index, name):
    if port.width is None:
        if index is not None:
            raise ReactorError(f"port '{name}' is not a vector")
        if isinstance(value, (tuple, list)):
            raise ReactorError(f"port '{name}' expects a real, got a vector")
        return float(value)
    if index is not None:
        if not 0 <= index < port.width:
            raise ReactorError(f"index {index} out of range for '{name}'")
        if isinstance(value, (tuple, list)):
            raise ReactorError(f"element of '{name}' must be a real")
        items = list(port.value)
        items[index] = float(value)
        return tuple(items)
    if isinstance(value, (int, float)):
        raise ReactorError(f"port '{name}' expects a vector of length {port.width}")
    items = tuple(float(x) for x in value)
    if len(items) != port.width:
        raise ReactorError(f"port '{name}' expects {port.width} values, got {len(items)}")
    return items


class Engine:
    """Runs a program deterministically, one tag at a time.

    ``natives`` maps extern keys to Python callables taking a
    :class:`ReactionContext`. ``shuffle_seed`` randomizes bulk queue
    insertion order, which must not change the trace.
    """

    def __init__(self, program: ast.Program | ProgramInstance, natives: dict[str, Handler] | None = None,
                 *, realtime: bool = False, shuffle_seed: int | None = None, prune: bool = True):
        bound = {}
        if isinstance(program, ast.Program):
            bound.update(program.natives)
            from ..dsl.validate import validate
            diags = validate(program, graph_checks=False)
            if diags:
                raise ValidationError(diags)
            program = elaborate(program)
        self.program = program
        self.analysis = graph.analyze(program, prune=prune)
        if self.analysis.diagnostics:
            raise ValidationError(self.analysis.diagnostics)

        bound.update(program.program.natives)
        bound.update(natives or {})
        self.natives = bound
        missing = sorted({rx.decl.body.key for rx in program.reactions
                          if isinstance(rx.decl.body, ast.Extern)} - set(self.natives))
        if missing:
            raise ReactorError(f"no native handler bound for: {', '.join(missing)}")

        self.realtime = realtime
        rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
        self.queue = EventQueue(rng)
        self.suspended: list[Event] = []
        self.trace = Trace()
        self.current_tag: Tag = ZERO_TAG
        self.last_tag: Tag | None = None
        self.started = False
        self.finished = False

        self.timers_by_mode: dict = defaultdict(list)
        for t in program.timers:
            self.timers_by_mode[t.mode].append(t)
        self.state_by_mode: dict = defaultdict(list)
        for r in program.reactors:
            for key, var in r.state_vars.items():
                self.state_by_mode[var.mode].append((r, key, var))

        self._inbox: _queue.SimpleQueue = _queue.SimpleQueue()
        self._wakeup = threading.Event()
        self._epoch: int | None = None
        self._present: set = set()
        self._present_ports: dict[PortInstance, object] = {}
        self._written: dict[PortInstance, object] = {}
        self._ready: list = []
        self._queued: set = set()

    # clock

    def physical_now(self) -> int:
        """Nanoseconds of physical time since the engine started."""
        if self._epoch is None:
            return 0
        return time.monotonic_ns() - self._epoch

    # setup

    def start(self) -> None:
        if self.started:
            return
        self.started = True
        self._epoch = time.monotonic_ns()
        events = []
        for t in self.program.timers:
            e = Event(Tag(t.offset, 0), t)
            if modal.is_active(t.mode):
                events.append(e)
            else:
                e.suspended_at = ZERO_TAG
                self.suspended.append(e)
        events.append(Event(ZERO_TAG, self.program.special("startup", None)))
        for r in self.program.modal_reactors:
            m = r.current_mode
            if modal.is_active(m):
                m.had_startup = True
                trig = self.program.specials.get(("startup", m))
                if trig is not None and trig.reactions:
                    events.append(Event(ZERO_TAG, trig))
        self.queue.push_many(events)

    # physical actions

    def inject_physical(self, action: str | ActionInstance, payload=None) -> None:
        """Thread-safe: hand a physical event to the engine."""
        act = self.program.action(action) if isinstance(action, str) else action
        if not act.physical:
            raise ReactorError(f"action '{act.qname}' is not physical")
        self._inbox.put((act, payload))
        self._wakeup.set()

    def _drain_inbox(self) -> None:
        while True:
            try:
                act, payload = self._inbox.get_nowait()
            except _queue.Empty:
                return
            t = self.physical_now() + act.min_delay
            tag = Tag(t, 0)
            if self.last_tag is not None and tag <= self.last_tag:
                tag = self.last_tag.next_microstep()
            e = Event(tag, act, payload)
            if modal.is_active(act.mode):
                self.queue.push(e)
            else:
                e.suspended_at = tag
                self.suspended.append(e)

    def _wait_until(self, nanos: int) -> bool:
        """Sleep until physical time reaches ``nanos``; False if woken early."""
        while True:
            remaining = nanos - self.physical_now()
            if remaining <= 0:
                return True
            self._wakeup.clear()
            if not self._inbox.empty():
                return False
            if self._wakeup.wait(remaining / 1e9):
                return False

    # execution

    def is_present(self, obj) -> bool:
        if isinstance(obj, PortInstance):
            return obj in self._present_ports
        return obj in self._present

    def _enqueue(self, rx: ReactionInstance) -> None:
        if rx not in self._queued:
            self._queued.add(rx)
            heapq.heappush(self._ready, (rx.sort_key, id(rx), rx))

    def write_port(self, port: PortInstance, value, writer: ReactionInstance | None = None) -> None:
        if writer is not None:
            if port in self._written:
                del self._written[port]
            self._written[port] = value
        stack = [port]
        seen = set()
        while stack:
            p = stack.pop()
            if p in seen:
                continue
            seen.add(p)
            p.value = value
            self._present_ports[p] = value
            for rx in p.triggers:
                self._enqueue(rx)
            for c in p.outgoing:
                if not modal.is_active(c.mode):
                    continue
                if c.delay is None:
                    stack.append(c.dst)
                else:
                    self.queue.push(Event(shift(self.current_tag, Tag(c.delay, 0)), c, value))

    def _may_run(self, rx: ReactionInstance) -> bool:
        if modal.is_active(rx.mode):
            return True
        # shutdown reactions of modes that ever started run regardless
        return any(isinstance(t, SpecialTrigger) and t.kind == "shutdown" and t in self._present
                   for t in rx.triggers)

    def _run_reaction(self, rx: ReactionInstance) -> None:
        present = [n for n, obj in rx.names.items() if obj in rx.triggers and self.is_present(obj)]
        mode = rx.local_mode.name if rx.local_mode else "-"
        self.trace.add(self.current_tag, "REACTION", rx.owner.qname,
                       f"index={rx.index} mode={mode} triggers={','.join(present)}")
        ctx = ReactionContext(self, rx)
        body = rx.decl.body
        if isinstance(body, ast.Extern):
            self.natives[body.key](ctx)
        else:
            eval_reaction(body, ctx)

    def _execute(self, tag: Tag, events: list[Event]) -> TickReport:
        self.current_tag = tag
        report = TickReport(tag)
        self._present = set()
        self._present_ports = {}
        self._written = {}
        self._ready = []
        self._queued = set()

        for e in sorted(events, key=lambda e: e.trigger.ordinal):
            trig = e.trigger
            if isinstance(trig, Connection):
                self.write_port(trig.dst, e.payload)
                continue
            self._present.add(trig)
            if isinstance(trig, TimerInstance):
                self.trace.add(tag, "TIMER", trig.owner.qname, f"timer={trig.name}")
                if trig.period > 0:
                    self.queue.push(Event(Tag(tag.time + trig.period, 0), trig))
            elif isinstance(trig, ActionInstance):
                trig.value = 0.0 if e.payload is None else e.payload
                self.trace.add(tag, "ACTION", trig.owner.qname, f"action={trig.name}")
            else:
                where = trig.mode.reactor.qname if trig.mode else self.program.main.qname
                detail = f"mode={trig.mode.name}" if trig.mode else ""
                self.trace.add(tag, trig.kind.upper(), where, detail)
            for rx in trig.reactions:
                self._enqueue(rx)

        while self._ready:
            _, _, rx = heapq.heappop(self._ready)
            if not self._may_run(rx):
                continue
            self._run_reaction(rx)
            report.reactions.append(rx.qname)

        for port, value in self._written.items():
            self.trace.add(tag, "OUTPUT", port.owner.qname, f"port={port.name} value={format_value(value)}")
            report.outputs.append((port.qname, value))
        return report

    def peek_tag(self) -> Tag | None:
        self._drain_inbox()
        return self.queue.peek_tag()

    def next_tick(self) -> TickReport | None:
        """Process the earliest tag; None when nothing is pending."""
        self.start()
        while True:
            tag = self.peek_tag()
            if tag is None:
                return None
            if not self.realtime or self._wait_until(tag.time):
                break
        events = self.queue.pop_tag()
        if self.last_tag is not None:
            assert tag > self.last_tag, (tag, self.last_tag)
        report = self._execute(tag, events)
        modal.process_transitions(self)
        self.last_tag = tag
        return report

    def run(self, stop: int | None = None) -> Trace:
        """Run until the queue is exhausted or the next tag passes ``stop``.

        ``stop`` is in nanoseconds. Shutdown reactions then run at
        ``(stop, m + 1)`` where ``m`` is the last microstep processed at
        ``stop`` (0 if none).
        """
        self.start()
        while True:
            tag = self.peek_tag()
            if tag is None or (stop is not None and tag.time > stop):
                # in real time, keep accepting physical events until stop
                if self.realtime and stop is not None and not self._wait_until(stop):
                    continue
                break
            self.next_tick()
        self.shutdown(stop)
        return self.trace

    def shutdown(self, stop: int | None = None) -> Trace:
        if self.finished:
            return self.trace
        self.finished = True
        if stop is None:
            stop = self.last_tag.time if self.last_tag else 0
        m = self.last_tag.microstep if self.last_tag and self.last_tag.time == stop else 0
        final = Tag(stop, m + 1)
        if self.last_tag is not None and final <= self.last_tag:
            final = self.last_tag.next_microstep()
        self._execute(final, modal.shutdown_sweep(self, final))
        self.last_tag = final
        self.trace.finalize()
        return self.trace

    # introspection helpers

    def state_of(self, reactor_qname: str) -> dict:
        r = self.program.find(reactor_qname)
        return dict(r.state)

    def port_value(self, qname: str):
        owner, _, name = qname.rpartition(".")
        return self.program.find(owner).ports[name].value


def run_program(program: ast.Program, stop: int, natives=None, **kw) -> Trace:
    return Engine(program, natives, **kw).run(stop)


__all__ = ["Engine", "ReactionContext", "TickReport", "run_program"]

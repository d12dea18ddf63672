"""Mode activity, end-of-tick transition processing, and local time.

Events whose mode becomes inactive are moved from the event queue into a
suspended store together with the tag at which they were suspended.
History re-entry resumes them with their remaining delay; reset entry
discards them and restarts the mode's timers from their offsets.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from .runtime.events import Event
from .runtime.instance import ModeInstance
from .timecore import Tag, shift, tag_delta

if TYPE_CHECKING:
    from .runtime.engine import Engine

__all__ = ["is_active", "process_transitions", "tag_delta", "trigger_special", "shutdown_sweep"]


def is_active(mode: ModeInstance | None) -> bool:
    """A mode is active when it and every enclosing mode are current."""
    while mode is not None:
        if mode.reactor.current_mode is not mode:
            return False
        mode = mode.reactor.parent_mode
    return True


def trigger_special(engine: Engine, mode: ModeInstance | None, kind: str) -> bool:
    """Queue a startup/reset event for ``mode`` one microstep after now.

    Returns False (and queues nothing) when no reaction listens to it.
    """
    trig = engine.program.specials.get((kind, mode))
    if trig is None or not trig.reactions:
        return False
    engine.queue.push(Event(shift(engine.current_tag, Tag(0, 0)), trig))
    return True


def _take_events(engine: Engine, mode: ModeInstance) -> list[Event]:
    taken = engine.queue.remove_where(lambda e: e.mode is mode)
    keep = []
    for e in engine.suspended:
        (taken if e.mode is mode else keep).append(e)
    engine.suspended = keep
    return taken


def process_transitions(engine: Engine) -> None:
    modal = engine.program.modal_reactors  # top-down order
    if not any(r.transition for r in modal):
        return
    now = engine.current_tag

    # pass 1: a reset propagates to every modal reactor nested below it
    for r in modal:
        pm = r.parent_mode
        if pm is not None and pm.reactor.transition == "reset":
            r.next_mode, r.transition = r.initial_mode, "reset"

    # pass 2: switch modes
    for r in modal:
        if r.transition is None:
            continue
        target = r.next_mode
        if r.transition == "reset":
            # everything pending in the target's local time is void
            _take_events(engine, target)
            for timer in engine.timers_by_mode.get(target, ()):
                engine.queue.push(Event(shift(now, Tag(timer.offset, 0)), timer))
            target.reset_pending = True
        old = r.current_mode
        old.leave_time = now
        r.current_mode = target
        engine.trace.add(now, "MODE_SWITCH", r.qname,
                         f"from={old.name} to={target.name} kind={r.transition}")
        r.next_mode = None
        r.transition = None

    # history resumption: anything suspended whose mode is active again
    resumed, keep = [], []
    for e in engine.suspended:
        (resumed if is_active(e.mode) else keep).append(e)
    engine.suspended = keep
    for e in resumed:
        e.tag = shift(now, tag_delta(e.tag, e.suspended_at))
        e.suspended_at = None
    engine.queue.push_many(resumed)

    # pass 3: startup and reset triggers at the next microstep
    for r in modal:
        cur = r.current_mode
        if not is_active(cur):
            continue
        if not cur.had_startup:
            cur.had_startup = True
            trigger_special(engine, cur, "startup")
        if cur.reset_pending:
            cur.reset_pending = False
            trigger_special(engine, cur, "reset")
            for owner, key, var in engine.state_by_mode.get(cur, ()):
                if var.reset:
                    owner.state[key] = var.initial

    # pass 4: suspend events of modes that just became inactive
    for e in engine.queue.remove_where(lambda e: not is_active(e.mode)):
        e.suspended_at = now
        engine.suspended.append(e)


def shutdown_sweep(engine: Engine, final: Tag) -> list[Event]:
    """Shutdown events for modeless scopes and every mode that ever started."""
    events = [Event(final, engine.program.special("shutdown", None))]
    for m in engine.program.modes:
        trig = engine.program.specials.get(("shutdown", m))
        if m.had_startup and trig is not None and trig.reactions:
            events.append(Event(final, trig))
    return events

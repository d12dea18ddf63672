from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import MSEC, SEC, PROGRAMS, run_source
from props import exclusion_violations, history_checks, pairing_violations, reset_reentry_mismatches
from randprog import generate
from modal_reactors import Engine, Tag, parse
from modal_reactors.bundled import load, natives
from modal_reactors.modal import is_active, shutdown_sweep, tag_delta
from modal_reactors.timecore import shift

NESTED = """
    reactor Leaf {
        timer t(0, 100 msec);
        initial mode L1 { reaction(t) -> reset(L2) {= set_mode(L2); =} }
        mode L2 { reaction(t) {= =} }
    }
    reactor Mid {
        input go: real;
        timer t(0, 100 msec);
        initial mode A { leaf = new Leaf(); reaction(go) -> reset(B) {= set_mode(B); =} }
        mode B { reaction(go) -> reset(A) {= set_mode(A); =} }
    }
    main reactor {
        timer t(250 msec, 200 msec);
        mid = new Mid();
        reaction(t) -> mid.go {= set(mid.go, 1); =}
    }
"""


def _step_until(engine: Engine, t: int) -> None:
    engine.start()
    while (tag := engine.peek_tag()) is not None and tag.time <= t:
        engine.next_tick()


# is_active

def test_timing_activity_at_500_msec():
    eng = Engine(load("timing"))
    _step_until(eng, 500 * MSEC)
    modal = eng.program.find("TimingExample/modal")
    assert is_active(modal.modes["One"]) and not is_active(modal.modes["Two"])


def test_nested_child_in_inactive_mode_is_inactive():
    eng = Engine(parse(NESTED))
    _step_until(eng, 260 * MSEC)  # Mid switched to B at 250 msec
    mid = eng.program.find("Main/mid")
    leaf = eng.program.find("Main/mid/leaf")
    assert mid.current_mode.name == "B"
    assert not is_active(leaf.current_mode)


def test_elements_outside_modes_are_active():
    assert is_active(None)


# process_transitions on the timing example

def test_history_resumes_action_with_remaining_delay():
    eng = Engine(load("timing"))
    _step_until(eng, SEC)
    (a1,) = [e for e in eng.suspended if e.trigger.name == "A1"]
    assert a1.tag == Tag(1350 * MSEC, 0) and a1.suspended_at == Tag(SEC, 0)
    _step_until(eng, 2 * SEC)
    assert any(e.trigger.name == "A1" and e.tag == Tag(2350 * MSEC, 0) for e in eng.queue)


def test_reset_discards_pending_action_and_restarts_timer():
    eng = Engine(load("timing"))
    _step_until(eng, 2 * SEC)
    assert any(e.trigger.name == "A2" and e.tag == Tag(2350 * MSEC, 0) for e in eng.suspended)
    _step_until(eng, 3 * SEC)
    names = {(e.trigger.name, e.tag) for e in eng.queue}
    assert ("T2", Tag(3100 * MSEC, 0)) in names
    assert not any(e.trigger.name == "A2" for e in list(eng.queue) + eng.suspended)


def test_leave_time_recorded():
    eng = Engine(load("timing"))
    _step_until(eng, 2 * SEC)
    modal = eng.program.find("TimingExample/modal")
    assert modal.modes["One"].leave_time == Tag(SEC, 0)
    assert modal.modes["Two"].leave_time == Tag(2 * SEC, 0)


def test_deep_reset_forces_descendants_to_initial_mode():
    eng = Engine(parse(NESTED))
    _step_until(eng, 200 * MSEC)
    leaf = eng.program.find("Main/mid/leaf")
    assert leaf.current_mode.name == "L2"
    _step_until(eng, 449 * MSEC)
    while eng.last_tag < Tag(450 * MSEC, 0):  # B at 250, back to A by reset at 450
        eng.next_tick()
    mid = eng.program.find("Main/mid")
    assert mid.current_mode.name == "A"
    assert leaf.current_mode is leaf.initial_mode


def test_deep_reset_trace_records_child_switch():
    trace = run_source(NESTED, 500 * MSEC)
    leaf = [(r.tag.time // MSEC, r.fields["to"], r.fields["kind"]) for r in trace.select("MODE_SWITCH")
            if r.qname == "Main/mid/leaf"]
    assert (450, "L1", "reset") in leaf


# tag_delta

@pytest.mark.parametrize("due, left, want", [
    (Tag(1350 * MSEC, 0), Tag(SEC, 0), Tag(350 * MSEC, 0)),
    (Tag(SEC, 2), Tag(SEC, 2), Tag(0, 0)),
    (Tag(2 * SEC, 3), Tag(2 * SEC, 1), Tag(0, 1)),
])
def test_tag_delta_examples(due, left, want):
    assert tag_delta(due, left) == want
    assert shift(left, want) == due or due == left


def test_tag_delta_microsteps_land_two_later():
    r = Tag(5 * SEC, 0)
    assert shift(r, tag_delta(Tag(2 * SEC, 3), Tag(2 * SEC, 1))) == Tag(5 * SEC, 2)


# startup, reset, shutdown

STARTS = """
    main reactor {
        timer t(100 msec, 100 msec);
        state s: real = 0;
        initial mode A {
            reaction(t) -> history(B) {= set_mode(B); =}
        }
        mode B {
            reset state k: real = 5;
            reaction(startup) {= s = s + 1; =}
            reaction(reset) {= s = s + 10; =}
            reaction(t) -> reset(A) {= k = k + 1; set_mode(A); =}
        }
    }
"""


def test_first_entry_startup_next_microstep_and_once_only():
    trace = run_source(STARTS, 1 * SEC)
    starts = [r for r in trace.select("REACTION") if r.fields["triggers"] == "startup"]
    assert [r.tag for r in starts] == [Tag(100 * MSEC, 1)]


def test_history_entry_does_not_trigger_reset():
    eng = Engine(parse(STARTS))
    eng.run(1 * SEC)
    assert eng.state_of("Main")[(None, "s")] == 1.0


def test_reset_entry_triggers_reset_reactions_and_restores_state():
    src = STARTS.replace("history(B)", "reset(B)")
    eng = Engine(parse(src))
    _step_until(eng, 200 * MSEC)
    st_ = eng.program.main.state
    key = [k for k in st_ if k[1] == "k"][0]
    assert st_[key] == 6.0  # B ran once and bumped k
    _step_until(eng, 300 * MSEC)  # back into B by reset
    assert st_[key] == 5.0
    trace = eng.shutdown(300 * MSEC)
    resets = [r.tag for r in trace.select("REACTION") if r.fields["triggers"] == "reset"]
    # the first entry into B was a reset entry as well
    assert resets == [Tag(100 * MSEC, 1), Tag(300 * MSEC, 1)]


def test_lifecycle_pairing_program():
    program = parse((PROGRAMS / "lifecycle.lfm").read_text())
    eng = Engine(program)
    trace = eng.run(SEC)
    assert pairing_violations(eng.program, trace) == []
    machine = eng.program.find("Main/m")
    assert machine.modes["Idle"].had_startup is False
    ran = [(r.fields["index"], r.fields["mode"], r.fields["triggers"]) for r in trace.select("REACTION")
           if r.fields["triggers"] in ("startup", "shutdown") and r.qname == "Main/m"]
    assert sorted(ran) == sorted([("0", "Warm", "startup"), ("2", "Warm", "shutdown"),
                                  ("3", "Run", "startup"), ("5", "Run", "shutdown")])


def test_shutdown_runs_in_left_mode_but_not_never_entered():
    eng = Engine(parse((PROGRAMS / "lifecycle.lfm").read_text()))
    trace = eng.run(150 * MSEC)  # now in Run, Warm was left
    downs = {r.fields["mode"] for r in trace.select("REACTION") if r.fields["triggers"] == "shutdown"}
    assert downs == {"Warm", "Run", "-"}


def test_shutdown_sweep_without_modes():
    eng = Engine(parse("main reactor { reaction(shutdown) {= =} }"))
    eng.start()
    events = shutdown_sweep(eng, Tag(SEC, 1))
    assert [e.trigger.kind for e in events] == ["shutdown"]
    assert all(e.tag == Tag(SEC, 1) for e in events)


# weak preemption

def test_reactions_after_set_mode_still_run():
    src = """
        main reactor {
            timer t(0);
            output o: real;
            state n: real = 0;
            initial mode A {
                reaction(t) -> reset(B) {= set_mode(B); n = n + 1; =}
                reaction(t) -> o {= set(o, 1); n = n + 1; =}
            }
            mode B { reaction(t) {= n = 100; =} }
        }
    """
    eng = Engine(parse(src))
    trace = eng.run(0)
    assert eng.state_of("Main")[(None, "n")] == 2.0
    assert [r.fields["index"] for r in trace.select("REACTION") if r.tag == Tag(0, 0)] == ["0", "1"]


# properties

@pytest.mark.parametrize("name", ["timing", "furuta"])
def test_bundled_mutual_exclusion(name):
    eng = Engine(load(name), natives(name))
    trace = eng.run(5 * SEC)
    assert exclusion_violations(eng.program, trace) == []
    assert pairing_violations(eng.program, trace) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_programs_exclusion_and_pairing(seed):
    eng = Engine(parse(generate(seed)))
    trace = eng.run(2 * SEC)
    assert exclusion_violations(eng.program, trace) == []
    assert pairing_violations(eng.program, trace) == []


def test_timing_history_resumption_identity():
    checked, bad = history_checks(Engine(load("timing")), 4 * SEC)
    assert checked >= 1 and bad == []


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_history_resumption(seed):
    _, bad = history_checks(Engine(parse(generate(seed))), 2 * SEC)
    assert bad == []


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_reset_reentry_matches_fresh_start(seed):
    _, bad = reset_reentry_mismatches(generate(seed), 2 * SEC)
    assert bad == []

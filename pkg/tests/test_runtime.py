from __future__ import annotations

import threading
import time

import pytest

from conftest import MSEC, SEC, run_source
from modal_reactors import Engine, ReactorError, Tag, parse
from modal_reactors.bundled import load, natives
from modal_reactors.modal import is_active
from modal_reactors.runtime import Trace, elaborate
from modal_reactors.runtime.instance import TimerInstance


def outputs(trace: Trace, qname=None):
    return [(r.tag.time, r.tag.microstep, r.fields["port"], r.fields["value"])
            for r in trace.select("OUTPUT", qname)]


# instantiate

def test_timing_instantiation():
    eng = Engine(load("timing"))
    eng.start()
    modal = eng.program.find("TimingExample/modal")
    assert modal.current_mode.name == "One"
    assert all(m.leave_time == Tag(0, 0) and not m.reset_pending for m in modal.modes.values())
    queued = {e.trigger.name: e.tag for e in eng.queue if isinstance(e.trigger, TimerInstance)}
    assert queued == {"T": Tag(SEC, 0), "T1": Tag(100 * MSEC, 0)}
    assert [e.trigger.name for e in eng.suspended] == ["T2"]


def test_modeless_program_has_no_modal_reactors():
    p = elaborate(parse("main reactor { timer t(0); reaction(t) {= =} }"))
    assert p.modal_reactors == []


def test_furuta_instances_wired():
    p = elaborate(load("furuta"))
    assert [r.qname for r in p.reactors] == ["Furuta", "Furuta/sensor", "Furuta/controller", "Furuta/actuator"]
    pairs = {(c.src.qname, c.dst.qname) for c in p.connections}
    assert pairs == {("Furuta/sensor.angles", "Furuta/controller.angles"),
                     ("Furuta/controller.control", "Furuta/actuator.control")}


def test_offset_zero_timer_fires_at_start():
    trace = run_source("main reactor { timer t(0); reaction(t) {= =} }", SEC)
    assert [(r.tag.time, r.tag.microstep) for r in trace.select("TIMER")] == [(0, 0)]


# ports

def test_later_declared_writer_wins():
    src = """
        reactor W { output out: real; timer t(0);
            reaction(t) -> out {= set(out, 1); =}
            reaction(t) -> out {= set(out, 2); =} }
        main reactor { w = new W(); state seen: real = 0;
            reaction(w.out) {= seen = get(w.out); =} }
    """
    eng = Engine(parse(src))
    trace = eng.run(0)
    assert outputs(trace) == [(0, 0, "out", "2")]
    assert eng.state_of("Main")[(None, "seen")] == 2.0


def test_downstream_reads_value_at_same_tag():
    src = """
        reactor A { output o: real; timer t(10 msec); reaction(t) -> o {= set(o, 42); =} }
        reactor B { input i: real; output o: real; reaction(i) -> o {= set(o, get(i) + 1); =} }
        main reactor { a = new A(); b = new B(); a.o -> b.i; }
    """
    assert outputs(run_source(src, SEC)) == [(10 * MSEC, 0, "o", "42"), (10 * MSEC, 0, "o", "43")]


def test_delayed_connection():
    src = """
        reactor A { output o: real; timer t(100 msec); reaction(t) -> o {= set(o, 7); =} }
        reactor B { input i: real; output o: real; reaction(i) -> o {= set(o, get(i)); =} }
        main reactor { a = new A(); b = new B(); a.o -> b.i after 500 msec; }
    """
    out = outputs(run_source(src, SEC), "Main/b")
    assert out == [(600 * MSEC, 0, "o", "7")]


def test_delayed_connection_zero_delay_is_next_microstep():
    src = """
        reactor A { output o: real; timer t(100 msec); reaction(t) -> o {= set(o, 7); =} }
        reactor B { input i: real; output o: real; reaction(i) -> o {= set(o, get(i)); =} }
        main reactor { a = new A(); b = new B(); a.o -> b.i after 0; }
    """
    assert outputs(run_source(src, SEC), "Main/b") == [(100 * MSEC, 1, "o", "7")]


def test_ports_are_absent_on_later_tags():
    src = """
        reactor A { output o: real; timer t(0, 10 msec); state n: real = 0;
            reaction(t) -> o {= n = n + 1; if (n == 1) { set(o, 5); } =} }
        reactor B { input i: real; timer t(0, 10 msec); state p: real = 0;
            reaction(t) i {= p = p + is_present(i); =} }
        main reactor { a = new A(); b = new B(); a.o -> b.i; }
    """
    eng = Engine(parse(src))
    eng.run(50 * MSEC)
    assert eng.state_of("Main/b")[(None, "p")] == 1.0


def test_vector_ports():
    src = """
        main reactor {
            output v: real[3]; timer t(0);
            reaction(t) -> v {= set(v, 0, 1); set(v, 2, 3); =}
        }
    """
    assert outputs(run_source(src, 0)) == [(0, 0, "v", "[1,0,3]")]


# actions

SCHED = """
    main reactor {
        timer t(100 msec);
        logical action a(500 msec);
        logical action z(0);
        output o: real;
        reaction(t) -> a, z {= schedule(a, 0 sec); schedule(z, 0 sec); =}
        reaction(a) -> o {= set(o, 1); =}
        reaction(z) -> z {= =}
    }
"""


def test_schedule_uses_min_delay_and_zero_delay_microstep():
    trace = run_source(SCHED, SEC)
    tags = {r.fields["action"]: (r.tag.time, r.tag.microstep) for r in trace.select("ACTION")}
    assert tags == {"a": (600 * MSEC, 0), "z": (100 * MSEC, 1)}


def test_schedule_twice_same_tag_replaces_payload():
    src = """
        main reactor {
            timer t(0);
            logical action a(10 msec);
            output o: real;
            reaction(t) -> a extern "twice"
            reaction(a) -> o {= set(o, get(a)); =}
        }
    """

    def twice(ctx):
        ctx.schedule("a", 0, 1.0)
        ctx.schedule("a", 0, 2.0)

    trace = run_source(src, SEC, {"twice": twice})
    assert len(trace.select("ACTION")) == 1
    assert outputs(trace) == [(10 * MSEC, 0, "o", "2")]


def test_scheduling_physical_action_is_error():
    src = "main reactor { timer t(0); physical action p(0); reaction(t) -> p extern \"go\" reaction(p) {= =} }"
    with pytest.raises(ReactorError, match="physical"):
        run_source(src, SEC, {"go": lambda ctx: ctx.schedule("p", 0)})


# physical actions

PHYS = """
    main reactor {
        physical action p(0);
        output o: real;
        reaction(p) -> o {= set(o, get(p)); =}
    }
"""


def test_inject_while_idle_uses_clock():
    eng = Engine(parse(PHYS))
    eng.start()
    before = eng.physical_now()
    eng.inject_physical("Main.p", 3.0)
    report = eng.next_tick()  # startup
    report = eng.next_tick()
    assert report.tag.time >= before
    assert report.outputs == [("Main.o", 3.0)]


def test_inject_with_stale_clock_bumps_microstep():
    eng = Engine(parse(PHYS))
    eng.start()
    eng.next_tick()
    eng.last_tag = Tag(10 * SEC, 4)  # pretend logical time is far ahead of the clock
    eng.inject_physical("Main.p", 1.0)
    assert eng.peek_tag() == Tag(10 * SEC, 5)


def test_inject_logical_or_unknown_action_is_error():
    eng = Engine(parse(SCHED))
    with pytest.raises(ReactorError):
        eng.inject_physical("Main.a")
    with pytest.raises(ReactorError):
        eng.inject_physical("Main.nope")


def test_inject_from_another_thread_in_realtime():
    eng = Engine(parse(PHYS), realtime=True)

    def feed():
        for k in range(3):
            time.sleep(0.02)
            eng.inject_physical("Main.p", float(k))

    th = threading.Thread(target=feed)
    th.start()
    trace = eng.run(200 * MSEC)
    th.join()
    vals = [r.fields["value"] for r in trace.select("OUTPUT")]
    assert vals == ["0", "1", "2"]
    times = [r.tag for r in trace.select("ACTION")]
    assert times == sorted(times) and len(set(times)) == 3


# modes from reaction bodies

MODES = """
    main reactor {
        timer t(0, 100 msec);
        state n: real = 0;
        initial mode A {
            reaction(t) -> reset(B), reset(C) {= n = n + 1; set_mode(B); =}
            reaction(t) -> reset(C) {= set_mode(C); =}
        }
        mode B { reaction(t) -> reset(A) {= set_mode(A); =} }
        mode C { reaction(t) -> reset(C), reset(A) {= n = n + 1; if (n > 3) { set_mode(A); } else { set_mode(C); } =} }
    }
"""


def test_last_set_mode_wins_and_self_reset():
    trace = run_source(MODES, 500 * MSEC)
    switches = [(r.tag.time // MSEC, r.fields["from"], r.fields["to"]) for r in trace.select("MODE_SWITCH")]
    assert switches[:4] == [(0, "A", "C"), (100, "C", "C"), (200, "C", "C"), (300, "C", "A")]


def test_mode_entered_at_t_runs_at_next_microstep():
    src = """
        main reactor {
            timer go(1 sec);
            initial mode One { reaction(go) -> reset(Two) {= set_mode(Two); =} }
            mode Two { timer t(0); reaction(t) {= =} }
        }
    """
    trace = run_source(src, 2 * SEC)
    (rx,) = [r for r in trace.select("REACTION") if "mode=Two" in r.detail]
    assert rx.tag == Tag(SEC, 1)


def test_independent_reactors_ordered_by_name():
    src = """
        reactor X { timer t(0); reaction(t) {= =} }
        main reactor { b = new X(); a = new X(); }
    """
    assert [r.qname for r in run_source(src, 0).select("REACTION")] == ["Main/a", "Main/b"]


# run

def test_empty_program_trace():
    assert run_source("main reactor {}", SEC).render() == (
        "0|0|STARTUP|Main|\n" f"{SEC}|1|SHUTDOWN|Main|\n")


def test_shutdown_after_last_microstep_at_stop():
    src = """
        main reactor {
            timer t(1 sec); logical action z(0);
            reaction(t) -> z {= schedule(z, 0 sec); =}
            reaction(z) {= =}
        }
    """
    (sd,) = run_source(src, SEC).select("SHUTDOWN")
    assert sd.tag == Tag(SEC, 2)


def test_events_after_stop_do_not_run():
    trace = run_source("main reactor { timer t(0, 300 msec); reaction(t) {= =} }", SEC)
    assert [r.tag.time // MSEC for r in trace.select("TIMER")] == [0, 300, 600, 900]


def test_furuta_fast_mode_is_quick():
    t0 = time.perf_counter()
    Engine(load("furuta"), natives("furuta")).run(5 * SEC)
    assert time.perf_counter() - t0 < 1.0


def test_realtime_takes_wall_clock_time():
    t0 = time.perf_counter()
    Engine(load("timing"), realtime=True).run(300 * MSEC)
    assert time.perf_counter() - t0 >= 0.3


# invariants

def _ticks(engine: Engine, stop: int):
    reports = []
    engine.start()
    while (tag := engine.peek_tag()) is not None and tag.time <= stop:
        reports.append(engine.next_tick())
    return reports


def test_tags_strictly_increase():
    reports = _ticks(Engine(load("timing")), 4 * SEC)
    tags = [r.tag for r in reports]
    assert tags == sorted(tags) and len(set(tags)) == len(tags)


def test_popped_events_belong_to_active_scopes():
    eng = Engine(load("timing"))
    eng.start()
    seen = 0
    while (tag := eng.peek_tag()) is not None and tag.time <= 4 * SEC:
        for e in eng.queue:
            if e.tag == tag:
                assert is_active(e.mode)
                seen += 1
        eng.next_tick()
    assert seen > 10


def test_declaration_order_within_reactor():
    trace = run_source(load_text := """
        main reactor { timer t(0, 10 msec);
            reaction(t) {= =} reaction(t) {= =} reaction(t) {= =} }
    """, 30 * MSEC)
    by_tag = {}
    for r in trace.select("REACTION"):
        by_tag.setdefault(r.tag, []).append(int(r.fields["index"]))
    assert all(v == [0, 1, 2] for v in by_tag.values())
    assert load_text


def test_trace_round_trips_through_text():
    trace = Engine(load("timing")).run(4 * SEC)
    assert Trace.parse(trace.render()).render() == trace.render()

from __future__ import annotations

import re

import pytest
from hypothesis import given, settings, strategies as st

from randprog import generate
from modal_reactors import parse
from modal_reactors.bundled import load
from modal_reactors.diagram import DiagramOptions, emit_dot
from modal_reactors.runtime import elaborate

NO_LABELS = DiagramOptions(show_labels=False, bundle_transitions=True)
UNBUNDLED = DiagramOptions(show_labels=False, bundle_transitions=False)


def transition_edges(dot: str) -> list[str]:
    return [line.strip() for line in dot.splitlines() if "lhead=" in line]


def test_furuta_mode_clusters_and_labels():
    dot = emit_dot(load("furuta"))
    clusters = re.findall(r"subgraph (cluster_Furuta_controller__mode__\w+) \{", dot)
    assert [c.rsplit("__", 1)[1] for c in clusters] == ["SwingUp", "Catch", "Stabilize"]
    edges = transition_edges(dot)
    assert len(edges) == 3
    assert all('label="angles"' in e for e in edges)
    targets = [re.search(r"lhead=cluster_Furuta_controller__mode__(\w+)", e).group(1) for e in edges]
    assert sorted(targets) == ["Catch", "Stabilize", "SwingUp"]


def test_initial_mode_has_thick_border():
    dot = emit_dot(load("furuta"))
    block = dot.split("subgraph cluster_Furuta_controller__mode__SwingUp {")[1].split("}")[0]
    assert "peripheries=2;" in block and "penwidth=2;" in block
    other = dot.split("subgraph cluster_Furuta_controller__mode__Catch {")[1].split("}")[0]
    assert "peripheries" not in other


def test_timing_history_edge_into_one():
    edges = transition_edges(emit_dot(load("timing")))
    (h,) = [e for e in edges if "[H]" in e]
    assert "lhead=cluster_TimingExample_modal__mode__One" in h
    assert h.startswith("n_TimingExample_modal__r5 ")
    assert 'label="[H] next"' in h and "arrowhead=odot" in h


def test_modeless_reactor_has_no_mode_clusters():
    dot = emit_dot(parse("main reactor { timer t(0); reaction(t) {= =} }"))
    assert "cluster_Main {" in dot
    assert "__mode__" not in dot and "lhead" not in dot


def test_ports_duplicated_inside_modes():
    dot = emit_dot(load("furuta"))
    for mode in ("SwingUp", "Catch", "Stabilize"):
        assert f"n_Furuta_controller__mode__{mode}__port__angles [label=\"angles\"" in dot
        assert f"n_Furuta_controller__mode__{mode}__port__control [label=\"control\"" in dot


def test_output_is_deterministic():
    for name in ("timing", "furuta"):
        assert emit_dot(load(name)) == emit_dot(load(name))
        assert emit_dot(load(name), NO_LABELS) == emit_dot(load(name), NO_LABELS)


BUNDLE = """
    main reactor {
        input a: real; input b: real;
        initial mode X {
            reaction(a) -> reset(Y) {= set_mode(Y); =}
            reaction(b) -> reset(Y) {= set_mode(Y); =}
            reaction(b) -> history(Y) {= set_mode(Y); =}
        }
        mode Y { reaction(a) -> reset(X) {= set_mode(X); =} }
    }
"""


def test_bundling_merges_parallel_transitions_by_kind():
    bundled = transition_edges(emit_dot(parse(BUNDLE), NO_LABELS))
    assert len(bundled) == 3  # X->Y reset, X->Y history, Y->X reset
    assert all("ltail=" in e for e in bundled)
    assert len(transition_edges(emit_dot(parse(BUNDLE), UNBUNDLED))) == 4


def test_labels_keep_every_transition():
    edges = transition_edges(emit_dot(parse(BUNDLE)))
    assert len(edges) == 4
    assert sorted(re.search(r'label="([^"]*)"', e).group(1) for e in edges) == ["[H] b", "a", "a", "b"]


@pytest.mark.parametrize("options", [DiagramOptions(), UNBUNDLED])
def test_one_edge_per_mode_effect_bundled(options):
    prog = load("timing")
    inst = elaborate(prog)
    effects = sum(len(rx.mode_effects) for r in inst.reactors for rx in r.reactions)
    assert len(transition_edges(emit_dot(prog, options))) == effects


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_programs_one_edge_per_mode_effect(seed):
    prog = parse(generate(seed))
    inst = elaborate(prog)
    effects = sum(len(rx.mode_effects) for r in inst.reactors for rx in r.reactions)
    dot = emit_dot(prog)
    assert len(transition_edges(dot)) == effects
    assert dot == emit_dot(parse(generate(seed)))
    assert dot.count("{") == dot.count("}")

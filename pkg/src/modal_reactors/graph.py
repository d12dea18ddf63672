"""Reaction dependency graph, mode-aware causality and execution levels."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .errors import Diagnostic
from .runtime.instance import (
    Connection,
    PortInstance,
    ProgramInstance,
    ReactionInstance,
    mode_chain,
)

__all__ = [
    "Edge",
    "DependencyGraph",
    "CausalityError",
    "Analysis",
    "build",
    "mutually_exclusive",
    "validate_multi_writer",
    "assign_levels",
    "analyze",
]


@dataclass(frozen=True)
class Edge:
    src: ReactionInstance
    dst: ReactionInstance
    kind: str  # "precedence" | "dataflow"
    via: tuple[PortInstance, PortInstance] | None = None


@dataclass
class DependencyGraph:
    nodes: list[ReactionInstance]
    edges: dict[tuple[ReactionInstance, ReactionInstance], Edge] = field(default_factory=dict)

    def add(self, edge: Edge) -> None:
        key = (edge.src, edge.dst)
        old = self.edges.get(key)
        # keep the dataflow explanation when both kinds link the same pair
        if old is None or (old.kind == "precedence" and edge.kind == "dataflow"):
            self.edges[key] = edge

    def successors(self, edges=None) -> dict:
        out = defaultdict(list)
        for e in (self.edges.values() if edges is None else edges):
            out[e.src].append(e)
        for lst in out.values():
            lst.sort(key=lambda e: e.dst.sort_key)
        return out


class CausalityError(Exception):
    def __init__(self, diagnostic: Diagnostic, cycle: list[Edge]):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic
        self.cycle = cycle


def _label(port: PortInstance, main_name: str) -> str:
    owner = port.owner.qname
    if owner == main_name:
        return port.name
    return f"{owner[len(main_name) + 1:]}.{port.name}"


def downstream(port: PortInstance) -> list[PortInstance]:
    """Ports reached from ``port`` through undelayed connections, itself first."""
    seen = [port]
    stack = [port]
    while stack:
        p = stack.pop()
        for c in p.outgoing:
            if c.delay is None and c.dst not in seen:
                seen.append(c.dst)
                stack.append(c.dst)
    return seen


def build(program: ProgramInstance) -> DependencyGraph:
    g = DependencyGraph(list(program.reactions))
    for r in program.reactors:
        rxs = sorted(r.reactions, key=lambda x: x.index)
        for i, a in enumerate(rxs):
            for b in rxs[i + 1:]:
                g.add(Edge(a, b, "precedence"))
    for a in program.reactions:
        for p in a.port_effects.values():
            for q in downstream(p):
                for b in q.readers:
                    g.add(Edge(a, b, "dataflow", (p, q)))
    return g


def mutually_exclusive(a, b) -> bool:
    """True when ``a`` and ``b`` sit in different modes of one modal reactor.

    Works for anything with a ``mode`` attribute (reactions, connections).
    """
    by_reactor = {m.reactor: m for m in mode_chain(a.mode)}
    for m in mode_chain(b.mode):
        other = by_reactor.get(m.reactor)
        if other is not None and other is not m:
            return True
    return False


def _writer_name(w, main_name: str) -> str:
    if isinstance(w, Connection):
        return f"connection {_label(w.src, main_name)} -> {_label(w.dst, main_name)}"
    return f"reaction {w.qname}"


def validate_multi_writer(program: ProgramInstance) -> list[Diagnostic]:
    writers: dict[PortInstance, list] = defaultdict(list)
    for rx in program.reactions:
        for p in rx.port_effects.values():
            if rx not in writers[p]:
                writers[p].append(rx)
    for c in program.connections:
        writers[c.dst].append(c)

    main = program.main.qname
    diags = []
    for port in sorted(writers, key=lambda p: p.qname):
        ws = writers[port]
        bad = []
        for i, a in enumerate(ws):
            for b in ws[i + 1:]:
                same_reactor = (isinstance(a, ReactionInstance) and isinstance(b, ReactionInstance)
                                and a.owner is b.owner)
                if not same_reactor and not mutually_exclusive(a, b):
                    bad.append((a, b))
        if bad:
            names = []
            for a, b in bad:
                for w in (a, b):
                    n = _writer_name(w, main)
                    if n not in names:
                        names.append(n)
            diags.append(Diagnostic(
                "MULTIWRITER", f"port {port.qname} fed by {', '.join(names)}"))
    return diags


def _find_cycle(nodes, succ) -> list[Edge] | None:
    color: dict = {}
    for start in sorted(nodes, key=lambda n: n.sort_key):
        if start in color:
            continue
        # iterative DFS keeping the edge path
        path: list[Edge] = []
        stack = [(start, iter(succ.get(start, ())))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            edge = next(it, None)
            if edge is None:
                color[node] = 2
                stack.pop()
                if path:
                    path.pop()
                continue
            nxt = edge.dst
            if color.get(nxt) == 1:
                cyc = path + [edge]
                for i, e in enumerate(cyc):
                    if e.src is nxt:
                        return cyc[i:]
            if nxt not in color:
                color[nxt] = 1
                path.append(edge)
                stack.append((nxt, iter(succ.get(nxt, ()))))
    return None


def render_cycle(cycle: list[Edge], main_name: str) -> str:
    def ends(e: Edge) -> tuple[str, str]:
        if e.via is not None:
            return _label(e.via[0], main_name), _label(e.via[1], main_name)
        return e.src.qname, e.dst.qname

    parts = [ends(cycle[-1])[1]]
    for e in cycle:
        a, b = ends(e)
        if parts[-1] != a:
            parts.append(a)
        parts.append(b)
    return " -- ".join(parts)


def _layer(nodes, edges) -> dict:
    succ = defaultdict(list)
    indeg = {n: 0 for n in nodes}
    for e in edges:
        succ[e.src].append(e.dst)
        indeg[e.dst] += 1
    level = {n: 0 for n in nodes}
    ready = [n for n in nodes if indeg[n] == 0]
    while ready:
        n = ready.pop()
        for m in succ[n]:
            level[m] = max(level[m], level[n] + 1)
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return level


def assign_levels(graph: DependencyGraph, main_name: str = "", prune: bool = True):
    """Level per reaction: longest-path depth in the pruned graph.

    Edges between mutually exclusive reactions are pruned. Dataflow edges go
    first; precedence edges inside a reactor are only dropped when keeping
    them would leave a cycle, so declaration order still orders reactions
    wherever it can. Raises :class:`CausalityError` on a residual cycle.
    """
    all_edges = list(graph.edges.values())
    attempts = [all_edges]
    if prune:
        exclusive = {k for k, e in graph.edges.items() if mutually_exclusive(e.src, e.dst)}
        data_pruned = [e for e in all_edges
                       if not ((e.src, e.dst) in exclusive and e.kind == "dataflow")]
        fully_pruned = [e for e in all_edges if (e.src, e.dst) not in exclusive]
        attempts = [data_pruned, fully_pruned]
    cycle = None
    for edges in attempts:
        cycle = _find_cycle(graph.nodes, graph.successors(edges))
        if cycle is None:
            return _layer(graph.nodes, edges), edges
    diag = Diagnostic("CAUSALITY", render_cycle(cycle, main_name))
    raise CausalityError(diag, cycle)


@dataclass
class Analysis:
    graph: DependencyGraph
    levels: dict
    retained: list[Edge]
    diagnostics: list[Diagnostic]


def analyze(program: ProgramInstance, prune: bool = True) -> Analysis:
    """Build the graph, check writers and causality, and store levels on reactions."""
    graph = build(program)
    diags = validate_multi_writer(program)
    levels: dict = {}
    retained: list[Edge] = []
    try:
        levels, retained = assign_levels(graph, program.main.qname, prune)
    except CausalityError as err:
        diags.append(err.diagnostic)
    for rx in program.reactions:
        rx.level = levels.get(rx, 0)
    return Analysis(graph, levels, retained, diags)

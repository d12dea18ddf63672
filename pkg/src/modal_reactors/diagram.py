"""Graphviz DOT rendering of a program's structure.

Reactor instances become clusters and modes nested clusters. Mode
transitions are edges into the target mode's cluster. Ports a mode uses
are drawn again inside that mode so dataflow edges do not cross mode
borders.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .dsl import ast
from .runtime.instance import (
    ModeInstance,
    PortInstance,
    ProgramInstance,
    ReactionInstance,
    ReactorInstance,
    SpecialTrigger,
    elaborate,
)

__all__ = ["DiagramOptions", "emit_dot"]

_REACTOR_STYLE = 'style="rounded,filled" fillcolor="#e6eef7" color="#5b7fa6"'
_MODE_STYLE = 'style="rounded,filled" fillcolor="#f7f1e0" color="#a68a4c"'


@dataclass(frozen=True)
class DiagramOptions:
    show_labels: bool = True
    bundle_transitions: bool = True


def _id(*parts: str) -> str:
    return "n_" + "__".join(re.sub(r"[^A-Za-z0-9_]", "_", p) for p in parts)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


class _Emitter:
    def __init__(self, program: ProgramInstance, options: DiagramOptions):
        self.program = program
        self.opt = options
        self.lines: list[str] = []
        self.edges: list[str] = []
        self.depth = 1

    def out(self, line: str) -> None:
        self.lines.append("  " * self.depth + line)

    # node ids

    @staticmethod
    def reaction_id(rx: ReactionInstance) -> str:
        return _id(rx.owner.qname, f"r{rx.index}")

    @staticmethod
    def anchor_id(mode: ModeInstance) -> str:
        return _id(mode.reactor.qname, "mode", mode.name, "anchor")

    @staticmethod
    def cluster_id(*parts: str) -> str:
        return "cluster_" + _id(*parts)[2:]

    @staticmethod
    def port_id(p: PortInstance, mode: ModeInstance | None = None) -> str:
        if mode is not None and mode.reactor is p.owner:
            return _id(p.owner.qname, "mode", mode.name, "port", p.name)
        return _id(p.owner.qname, "port", p.name)

    # structure

    def emit(self) -> str:
        self.lines = ["digraph program {"]
        self.out("compound=true;")
        self.out("rankdir=LR;")
        self.out('node [fontname="Helvetica" fontsize=10];')
        self.out('edge [fontname="Helvetica" fontsize=9];')
        self.reactor(self.program.main)
        self.transitions()
        for e in sorted(set(self.edges)):
            self.out(e)
        self.lines.append("}")
        return "\n".join(self.lines) + "\n"

    def reactor(self, r: ReactorInstance) -> None:
        self.out(f"subgraph {self.cluster_id(r.qname)} {{")
        self.depth += 1
        self.out(f"label={_quote(r.name + ' : ' + r.decl.name)};")
        self.out(_REACTOR_STYLE + ";")
        for p in r.ports.values():
            shape = "rarrow" if p.direction == "input" else "larrow"
            label = p.name if p.width is None else f"{p.name}[{p.width}]"
            self.out(f"{self.port_id(p)} [label={_quote(label)} shape={shape} style=filled fillcolor=white];")
        self.contents(r, None)
        for m in r.modes.values():
            self.mode(r, m)
        self.depth -= 1
        self.out("}")

    def mode(self, r: ReactorInstance, m: ModeInstance) -> None:
        self.out(f"subgraph {self.cluster_id(r.qname, 'mode', m.name)} {{")
        self.depth += 1
        self.out(f"label={_quote(m.name)};")
        self.out(_MODE_STYLE + ";")
        if m.is_initial:
            self.out("peripheries=2;")
            self.out("penwidth=2;")
        self.out(f'{self.anchor_id(m)} [label="" shape=point style=invis width=0];')
        for p in self._ports_used_in(r, m):
            shape = "rarrow" if p.direction == "input" else "larrow"
            self.out(f"{self.port_id(p, m)} [label={_quote(p.name)} shape={shape} "
                     "style=filled fillcolor=white width=0.2 height=0.2];")
        self.contents(r, m)
        self.depth -= 1
        self.out("}")

    def _connections_of(self, r: ReactorInstance, m: ModeInstance | None):
        return [c for c in self.program.connections if c.owner is r and _local(c.mode, r) is m]

    def _ports_used_in(self, r: ReactorInstance, m: ModeInstance) -> list[PortInstance]:
        used: list[PortInstance] = []
        for rx in r.reactions:
            if rx.local_mode is not m:
                continue
            for obj in list(rx.names.values()) + list(rx.port_effects.values()):
                if isinstance(obj, PortInstance) and obj.owner is r and obj not in used:
                    used.append(obj)
        for c in self._connections_of(r, m):
            for p in (c.src, c.dst):
                if p.owner is r and p not in used:
                    used.append(p)
        return used

    def contents(self, r: ReactorInstance, m: ModeInstance | None) -> None:
        for t in r.timers:
            if _local(t.mode, r) is m:
                self.out(f"{_id(t.owner.qname, 'timer', t.name)} "
                         f"[label={_quote(t.name)} shape=circle width=0.3 fixedsize=false];")
                for rx in t.reactions:
                    self.edges.append(f"{_id(t.owner.qname, 'timer', t.name)} -> {self.reaction_id(rx)};")
        for a in r.actions:
            if _local(a.mode, r) is m:
                aid = _id(a.owner.qname, "action", a.name)
                letter = "P" if a.physical else "L"
                self.out(f"{aid} [label={_quote(letter + ' ' + a.name)} shape=triangle];")
                for rx in a.reactions:
                    self.edges.append(f"{aid} -> {self.reaction_id(rx)};")
        for rx in r.reactions:
            if rx.local_mode is m:
                self.reaction(rx, m)
        for child in r.children.values():
            if _local(child.parent_mode, r) is m:
                self.reactor(child)
        for c in self._connections_of(r, m):
            style = "" if c.delay is None else " [style=dashed label=\"after\"]"
            self.edges.append(f"{self.port_id(c.src, m)} -> {self.port_id(c.dst, m)}{style};")

    def reaction(self, rx: ReactionInstance, m: ModeInstance | None) -> None:
        rid = self.reaction_id(rx)
        self.out(f"{rid} [label={_quote(str(rx.index + 1))} shape=cds style=filled fillcolor=\"#d0d0d0\"];")
        for name, obj in rx.names.items():
            if isinstance(obj, PortInstance):
                self.edges.append(f"{self.port_id(obj, m)} -> {rid};")
            elif isinstance(obj, SpecialTrigger):
                sid = _id(rx.owner.qname, f"r{rx.index}", obj.kind)
                self.out(f"{sid} [label={_quote(obj.kind)} shape=plaintext];")
                self.edges.append(f"{sid} -> {rid};")
        for p in rx.port_effects.values():
            self.edges.append(f"{rid} -> {self.port_id(p, m)};")

    # transitions

    def transitions(self) -> None:
        bundles: dict[tuple, list[str]] = {}
        for r in self.program.modal_reactors:
            for rx in r.reactions:
                if not rx.mode_effects:
                    continue
                labels = [str(n) for n, obj in rx.names.items() if obj in rx.triggers]
                for name in sorted(rx.mode_effects):
                    target, kind = rx.mode_effects[name]
                    prefix = "[H] " if kind == "history" else ""
                    text = prefix + ", ".join(labels) if self.opt.show_labels else prefix.strip()
                    if not self.opt.show_labels and self.opt.bundle_transitions and rx.local_mode is not None:
                        key = (rx.local_mode, target, kind)
                        bundles.setdefault(key, []).append(rx.qname)
                        continue
                    attrs = [f"lhead={self.cluster_id(r.qname, 'mode', target.name)}", "color=\"#a03030\""]
                    if text:
                        attrs.append(f"label={_quote(text)}")
                    if kind == "history":
                        attrs.append("arrowhead=odot")
                    self.edges.append(f"{self.reaction_id(rx)} -> {self.anchor_id(target)} [{' '.join(attrs)}];")
        for (src, dst, kind), _ in bundles.items():
            r = src.reactor
            attrs = [f"ltail={self.cluster_id(r.qname, 'mode', src.name)}",
                     f"lhead={self.cluster_id(r.qname, 'mode', dst.name)}", "color=\"#a03030\""]
            if kind == "history":
                attrs += ['label="[H]"', "arrowhead=odot"]
            self.edges.append(f"{self.anchor_id(src)} -> {self.anchor_id(dst)} [{' '.join(attrs)}];")


def _local(mode: ModeInstance | None, r: ReactorInstance) -> ModeInstance | None:
    """The mode of ``r`` an element sits in, or None for reactor level."""
    return mode if mode is not None and mode.reactor is r else None


def emit_dot(program: ast.Program | ProgramInstance, options: DiagramOptions | None = None) -> str:
    if isinstance(program, ast.Program):
        program = elaborate(program)
    return _Emitter(program, options or DiagramOptions()).emit()

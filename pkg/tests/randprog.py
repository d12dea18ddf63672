"""Random modal program generator for property tests."""

from __future__ import annotations

import random


def _dur(rng: random.Random, lo: int, hi: int, step: int = 10) -> str:
    return f"{rng.randrange(lo, hi + 1, step)} msec"


def _modal_class(rng: random.Random, name: str, inner: str | None) -> list[str]:
    n_modes = rng.randint(2, 3)
    modes = [f"{name}M{i}" for i in range(n_modes)]
    lines = [f"reactor {name} {{", "    output out: real;", "    state c: real = 0;",
             "    reset state r: real = 0;"]
    if rng.random() < 0.5:
        lines.append(f"    timer g(0, {_dur(rng, 100, 400)});")
        lines.append("    reaction(g) {= c = c + 0; =}")
    child_mode = rng.randrange(n_modes) if inner else None
    for i, mode in enumerate(modes):
        lines.append(f"    {'initial ' if i == 0 else ''}mode {mode} {{")
        # nonzero offsets: a mode that resets itself from an offset-0 timer
        # would loop in microsteps forever
        period = "0" if rng.random() < 0.2 else _dur(rng, 50, 300)
        lines.append(f"        timer t{i}({_dur(rng, 10, 200)}, {period});")
        lines.append(f"        logical action a{i}({_dur(rng, 0, 150)});")
        others = [m for m in modes if m != mode] or modes
        target = rng.choice(others + [mode] if rng.random() < 0.2 else others)
        kind = rng.choice(["reset", "history"])
        limit = rng.randint(0, 3)
        lines.append(f"        reaction(t{i}) -> a{i}, {kind}({target}) {{=")
        lines.append(f"            schedule(a{i}, 0 sec);")
        lines.append("            c = c + 1;")
        lines.append("            r = r + 1;")
        lines.append(f"            if (c > {limit}) {{ c = 0; set_mode({target}); }}")
        lines.append("        =}")
        lines.append(f"        reaction(a{i}) -> out {{= set(out, {i} + r / 100); =}}")
        if rng.random() < 0.4:
            lines.append(f"        reaction(startup) {{= r = r + 0; =}}")
        if rng.random() < 0.4:
            lines.append(f"        reaction(reset) {{= r = 0; =}}")
        if rng.random() < 0.4:
            lines.append(f"        reaction(shutdown) {{= =}}")
        if child_mode == i:
            lines.append(f"        sub = new {inner}();")
        lines.append("    }")
    lines.append("}")
    return lines


def generate(seed: int) -> str:
    """Source text of a random, valid modal program."""
    rng = random.Random(seed)
    out = ["target Python;", ""]
    inner = None
    if rng.random() < 0.5:
        inner = "Inner"
        out += _modal_class(rng, inner, None) + [""]
    n = rng.randint(1, 3)
    for k in range(n):
        out += _modal_class(rng, f"R{k}", inner if rng.random() < 0.6 else None) + [""]
    out.append("main reactor Main {")
    for k in range(n):
        out.append(f"    r{k} = new R{k}();")
    out.append("    reaction(" + ", ".join(f"r{k}.out" for k in range(n)) + ") {= =}")
    out.append("}")
    return "\n".join(out) + "\n"

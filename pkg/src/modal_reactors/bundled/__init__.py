"""Example programs shipped with the package."""

from __future__ import annotations

from importlib.resources import files

from ..dsl import ast, parse

EXAMPLES = ("timing", "furuta")


def source(name: str) -> str:
    if name not in EXAMPLES:
        raise KeyError(name)
    return files(__package__).joinpath(f"{name}.lfm").read_text(encoding="utf-8")


def load(name: str) -> ast.Program:
    return parse(source(name), f"{name}.lfm")


def natives(name: str) -> dict:
    """Native handlers an example needs (a fresh plant for ``furuta``)."""
    if name == "furuta":
        from .furuta import Plant, bind

        return bind(Plant())
    return {}

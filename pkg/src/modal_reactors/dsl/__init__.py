"""The textual reactor language: parsing, printing, validation, scripts."""

from .ast import bind_native
from .parser import parse, parse_script
from .printer import print_program
from .validate import validate

__all__ = ["bind_native", "parse", "parse_script", "print_program", "validate"]

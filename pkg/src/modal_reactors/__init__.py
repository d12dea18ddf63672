"""Modal reactors: deterministic reactors with modes, history and reset."""

from .dsl import parse, print_program, validate
from .errors import Diagnostic, ParseError, ReactorError, ValidationError
from .runtime import Engine, Trace
from .timecore import Duration, Tag, parse_duration, shift, tag_delta

__version__ = "0.1.0"

__all__ = [
    "parse",
    "print_program",
    "validate",
    "Diagnostic",
    "ParseError",
    "ReactorError",
    "ValidationError",
    "Engine",
    "Trace",
    "Duration",
    "Tag",
    "parse_duration",
    "shift",
    "tag_delta",
]

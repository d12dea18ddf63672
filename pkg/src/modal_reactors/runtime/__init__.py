"""Instances, event queue, engine and traces."""

from .engine import Engine, ReactionContext, TickReport, run_program
from .events import Event, EventQueue
from .instance import ProgramInstance, elaborate
from .trace import Record, Trace

__all__ = [
    "Engine",
    "ReactionContext",
    "TickReport",
    "run_program",
    "Event",
    "EventQueue",
    "ProgramInstance",
    "elaborate",
    "Record",
    "Trace",
]

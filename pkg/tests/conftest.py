from __future__ import annotations

import sys
from pathlib import Path

import pytest

from modal_reactors import Engine, parse
from modal_reactors.timecore import UNITS

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"
BUNDLED = ROOT / "src" / "modal_reactors" / "bundled"

MSEC = UNITS["msec"]
SEC = UNITS["sec"]


def run_source(text: str, stop: int, natives=None, **kw):
    return Engine(parse(text), natives, **kw).run(stop)


@pytest.fixture
def programs_dir() -> Path:
    return PROGRAMS


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)

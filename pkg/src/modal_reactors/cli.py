"""Command-line interface: ``lfm check|run|run-example|diagram``.

Traces, CSV and DOT go to stdout (or the given file); diagnostics go to
stderr. Exit codes: 0 success, 1 program error, 2 I/O or usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bundled
from .diagram import DiagramOptions, emit_dot
from .dsl import ast, parse, validate
from .errors import ParseError, ReactorError, ValidationError
from .runtime.engine import Engine
from .timecore import parse_duration

EXIT_OK, EXIT_ERROR, EXIT_IO = 0, 1, 2


class _Fail(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path: str) -> ast.Program:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _Fail(EXIT_IO, f"error: cannot read {path}: {e.strerror or e}") from e
    try:
        return parse(text, path)
    except ParseError as e:
        raise _Fail(EXIT_ERROR, e.diagnostic.render()) from e


def _check(program: ast.Program) -> None:
    diags = validate(program)
    if diags:
        raise _Fail(EXIT_ERROR, "\n".join(d.render() for d in diags))


def _until(text: str) -> int:
    try:
        return parse_duration(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise _Fail(EXIT_IO, f"error: cannot write {path}: {e.strerror or e}") from e


def _execute(program: ast.Program, natives: dict, args) -> None:
    _check(program)
    try:
        engine = Engine(program, natives, realtime=args.mode == "realtime")
        trace = engine.run(args.until)
    except ValidationError as e:
        raise _Fail(EXIT_ERROR, "\n".join(d.render() for d in e.diagnostics)) from e
    except ReactorError as e:
        raise _Fail(EXIT_ERROR, f"error: {e}") from e
    if args.csv is not None:
        _emit(trace.to_csv(), args.csv)
    # the trace goes to stdout unless it was redirected or stdout carries the CSV
    if args.trace is not None:
        _emit(trace.render(), args.trace)
    elif args.csv != "-":
        _emit(trace.render(), None)


def cmd_check(args) -> int:
    _check(_load(args.file))
    return EXIT_OK


def cmd_run(args) -> int:
    _execute(_load(args.file), {}, args)
    return EXIT_OK


def cmd_run_example(args) -> int:
    if args.name not in bundled.EXAMPLES:
        raise _Fail(EXIT_ERROR, f"error: unknown example '{args.name}' "
                                f"(choose from {', '.join(bundled.EXAMPLES)})")
    _execute(bundled.load(args.name), bundled.natives(args.name), args)
    return EXIT_OK


def cmd_diagram(args) -> int:
    if args.file in bundled.EXAMPLES and not Path(args.file).exists():
        program = bundled.load(args.file)
    else:
        program = _load(args.file)
    _check(program)
    opts = DiagramOptions(show_labels=not args.no_labels, bundle_transitions=not args.no_bundle)
    _emit(emit_dot(program, opts), args.output)
    return EXIT_OK


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--until", type=_until, required=True, metavar="DUR",
                   help="stop time, e.g. '4 sec' or 4sec")
    p.add_argument("--mode", choices=("fast", "realtime"), default="fast")
    p.add_argument("--trace", metavar="PATH", help="write the trace here instead of stdout")
    p.add_argument("--csv", metavar="PATH", help="write OUTPUT records as CSV ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lfm", description="Check, run and draw modal reactor programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a program")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="execute a program and print its trace")
    p.add_argument("file")
    _run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("run-example", help="execute a bundled example")
    p.add_argument("name", help="timing or furuta")
    _run_flags(p)
    p.set_defaults(func=cmd_run_example)

    p = sub.add_parser("diagram", help="emit a DOT diagram")
    p.add_argument("file", help="program file or bundled example name")
    p.add_argument("-o", "--output", metavar="PATH")
    p.add_argument("--no-labels", action="store_true", help="omit transition labels")
    p.add_argument("--no-bundle", action="store_true", help="keep parallel transitions separate")
    p.set_defaults(func=cmd_diagram)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_IO if e.code else EXIT_OK
    try:
        return args.func(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not our failure
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except _Fail as f:
        if str(f):
            _err(str(f))
        return f.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

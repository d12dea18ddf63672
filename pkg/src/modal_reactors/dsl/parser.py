"""Recursive-descent parser for ``.lfm`` programs and their reaction scripts."""

from __future__ import annotations

from ..errors import Diagnostic, Location, ParseError
from ..timecore import UNITS
from . import ast
from .lexer import Token, tokenize

KEYWORDS = frozenset({
    "target", "main", "reactor", "mode", "initial", "input", "output", "state",
    "timer", "logical", "physical", "action", "reaction", "new", "after",
    "extern", "startup", "shutdown", "reset", "history", "real", "time",
    "if", "else", "set", "schedule", "set_mode",
})

SCRIPT_STATEMENTS = ("if", "set", "schedule", "set_mode")
COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.expected: set[str] = set()

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if self.pos < len(self.toks) - 1:
            self.pos += 1
        self.expected = set()
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        ok = t.kind == kind and (text is None or t.text == text)
        if not ok:
            self.expected.add(repr(text) if text is not None else _kind_name(kind))
        return ok

    def at_kw(self, word: str) -> bool:
        return self.at("ID", word)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.advance()
        return None

    def accept_kw(self, word: str) -> Token | None:
        return self.accept("ID", word)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if self.at(kind, text):
            return self.advance()
        self.fail()

    def expect_kw(self, word: str) -> Token:
        return self.expect("ID", word)

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind == "ID" and t.text not in KEYWORDS:
            return self.advance()
        self.expected.add(what)
        self.fail()

    def fail(self, message: str | None = None):
        t = self.tok
        if message is None:
            exp = ", ".join(sorted(self.expected)) or "?"
            message = f"expected one of {{{exp}}}, found {t.describe()}"
        raise ParseError(Diagnostic("SYNTAX", message, t.loc))


def _kind_name(kind: str) -> str:
    return {
        "ID": "identifier",
        "NUMBER": "number",
        "STRING": "string",
        "CODE": "'{= ... =}'",
        "EOF": "end of input",
    }.get(kind, repr(kind))


# -- scripts -----------------------------------------------------------------


class ScriptParser(_Cursor):
    def parse(self) -> ast.Script:
        body = []
        while not self.at("EOF"):
            body.append(self.statement())
        return ast.Script(body)

    def block(self) -> list:
        self.expect("{")
        body = []
        while not self.at("}"):
            if self.at("EOF"):
                self.fail()
            body.append(self.statement())
        self.advance()
        return body

    def statement(self):
        t = self.tok
        if self.accept_kw("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = []
            if self.accept_kw("else"):
                orelse = [self.statement()] if self.at_kw("if") else self.block()
            return ast.If(cond, then, orelse, t.loc)
        if self.accept_kw("set"):
            self.expect("(")
            port = self.ref()
            self.expect(",")
            first = self.expr()
            index = None
            if self.accept(","):
                index, first = first, self.expr()
            self.expect(")")
            self.expect(";")
            return ast.SetPort(port, index, first, t.loc)
        if self.accept_kw("schedule"):
            self.expect("(")
            action = self.ref()
            self.expect(",")
            delay = self.expr()
            self.expect(")")
            self.expect(";")
            return ast.Schedule(action, delay, t.loc)
        if self.accept_kw("set_mode"):
            self.expect("(")
            mode = self.ident("mode name").text
            self.expect(")")
            self.expect(";")
            return ast.SetMode(mode, t.loc)
        for kw in SCRIPT_STATEMENTS:
            self.expected.add(repr(kw))
        name = self.ident("state variable")
        self.expect("=")
        value = self.expr()
        self.expect(";")
        return ast.Assign(name.text, value, name.loc)

    def ref(self) -> ast.Ref:
        first = self.ident("port or action")
        if self.accept("."):
            second = self.ident()
            return ast.Ref(first.text, second.text, first.loc)
        return ast.Ref(None, first.text, first.loc)

    def expr(self):
        return self._or()

    def _or(self):
        left = self._and()
        while self.at("||"):
            t = self.advance()
            left = ast.Binary("||", left, self._and(), t.loc)
        return left

    def _and(self):
        left = self._cmp()
        while self.at("&&"):
            t = self.advance()
            left = ast.Binary("&&", left, self._cmp(), t.loc)
        return left

    def _cmp(self):
        left = self._add()
        for op in COMPARISONS:
            if self.at(op):
                t = self.advance()
                return ast.Binary(op, left, self._add(), t.loc)
        return left

    def _add(self):
        left = self._mul()
        while self.at("+") or self.at("-"):
            t = self.advance()
            left = ast.Binary(t.kind, left, self._mul(), t.loc)
        return left

    def _mul(self):
        left = self._unary()
        while self.at("*") or self.at("/"):
            t = self.advance()
            left = ast.Binary(t.kind, left, self._unary(), t.loc)
        return left

    def _unary(self):
        if self.at("-") or self.at("!"):
            t = self.advance()
            return ast.Unary(t.kind, self._unary(), t.loc)
        return self._primary()

    def _primary(self):
        t = self.tok
        if self.accept("NUMBER"):
            unit = self.tok
            if unit.kind == "ID" and unit.text in UNITS:
                if not t.text.isdigit():
                    self.fail("duration literals take an integer magnitude")
                self.advance()
                return ast.DurationLit(int(t.text) * UNITS[unit.text], t.loc)
            return ast.Num(float(t.text), t.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.at("ID") and self.peek().kind == "(":
            name = self.advance()
            self.advance()
            args = []
            if not self.at(")"):
                args.append(self._call_arg(name.text, 0))
                while self.accept(","):
                    args.append(self._call_arg(name.text, len(args)))
            self.expect(")")
            return ast.Call(name.text, args, name.loc)
        if self.at("ID") and t.text not in KEYWORDS:
            self.advance()
            if self.accept("."):
                member = self.ident()
                return ast.Ref(t.text, member.text, t.loc)
            return ast.Name(t.text, t.loc)
        self.expected.update({"number", "identifier", "'('", "'-'", "'!'"})
        self.fail()

    def _call_arg(self, func: str, position: int):
        if func in ("get", "is_present") and position == 0:
            return self.ref()
        return self.expr()


def parse_script(text: str, loc: Location | None = None) -> ast.Script:
    if loc is None:
        loc = Location(1, 1)
    toks = tokenize(text, loc.file, loc.line, loc.col)
    return ScriptParser(toks).parse()


# -- programs ----------------------------------------------------------------


class ProgramParser(_Cursor):
    def __init__(self, tokens: list[Token], file: str):
        super().__init__(tokens)
        self.file = file
        self._reaction_index = 0

    def parse(self) -> ast.Program:
        target = None
        if self.accept_kw("target"):
            target = self.expect("ID").text
            self.accept(";")
        reactors = []
        while not self.at("EOF"):
            reactors.append(self.reactor())
        return ast.Program(reactors, target, source_name=self.file)

    def reactor(self) -> ast.ReactorDecl:
        start = self.tok
        is_main = bool(self.accept_kw("main"))
        self.expect_kw("reactor")
        if is_main and self.at("{"):
            name = "Main"
        else:
            name = self.ident("reactor name").text
        params = self.params() if self.at("(") else []
        self._reaction_index = 0
        elements = self.body()
        return ast.ReactorDecl(name, is_main, params, elements, start.loc)

    def params(self) -> list[ast.Param]:
        self.expect("(")
        out = []
        while not self.at(")"):
            name = self.ident("parameter name")
            self.expect(":")
            if self.accept_kw("real"):
                self.expect("=")
                out.append(ast.Param(name.text, "real", self.signed_number(), name.loc))
            else:
                self.expect_kw("time")
                self.expect("=")
                out.append(ast.Param(name.text, "time", self.duration_literal(), name.loc))
            if not self.accept(","):
                break
        self.expect(")")
        return out

    def signed_number(self) -> float:
        neg = bool(self.accept("-"))
        v = float(self.expect("NUMBER").text)
        return -v if neg else v

    def duration_literal(self) -> int:
        t = self.expect("NUMBER")
        if t.text == "0" and not (self.tok.kind == "ID" and self.tok.text in UNITS):
            return 0
        if not t.text.isdigit():
            self.fail("duration literals take an integer magnitude")
        unit = self.tok
        if unit.kind == "ID" and unit.text in UNITS:
            self.advance()
            return int(t.text) * UNITS[unit.text]
        self.expected.update(repr(u) for u in UNITS)
        self.fail()

    def time_value(self) -> ast.TimeValue:
        if self.at("ID") and self.tok.text not in KEYWORDS:
            return ast.TimeValue(param=self.advance().text)
        return ast.TimeValue(nanos=self.duration_literal())

    def body(self) -> list:
        self.expect("{")
        elements = []
        while not self.accept("}"):
            if self.at("EOF"):
                self.fail()
            elements.append(self.element())
        return elements

    def element(self):
        t = self.tok
        if self.at_kw("input") or self.at_kw("output"):
            direction = self.advance().text
            name = self.ident("port name")
            self.expect(":")
            self.expect_kw("real")
            width = None
            if self.accept("["):
                w = self.expect("NUMBER")
                if not w.text.isdigit() or int(w.text) < 1:
                    raise ParseError(Diagnostic("SYNTAX", "vector width must be a positive integer", w.loc))
                width = int(w.text)
                self.expect("]")
            self.accept(";")
            return ast.PortDecl(name.text, direction, width, name.loc)
        if self.at_kw("reset") and self.peek().kind == "ID" and self.peek().text == "state":
            self.advance()
            return self.state(reset=True)
        if self.at_kw("state"):
            return self.state(reset=False)
        if self.accept_kw("timer"):
            name = self.ident("timer name")
            offset, period = ast.TimeValue(nanos=0), ast.TimeValue(nanos=0)
            if self.accept("("):
                offset = self.time_value()
                if self.accept(","):
                    period = self.time_value()
                self.expect(")")
            self.accept(";")
            return ast.TimerDecl(name.text, offset, period, name.loc)
        if self.at_kw("logical") or self.at_kw("physical"):
            kind = self.advance().text
            self.expect_kw("action")
            name = self.ident("action name")
            delay = ast.TimeValue(nanos=0)
            if self.accept("("):
                delay = self.time_value()
                self.expect(")")
            self.accept(";")
            return ast.ActionDecl(name.text, kind, delay, name.loc)
        if self.at_kw("reaction"):
            return self.reaction()
        if self.at_kw("initial") or self.at_kw("mode"):
            initial = bool(self.accept_kw("initial"))
            self.expect_kw("mode")
            name = self.ident("mode name")
            return ast.ModeDecl(name.text, initial, self.body(), name.loc)
        if self.at("ID") and t.text not in KEYWORDS:
            if self.peek().kind == "=":
                return self.instantiation()
            return self.connection()
        self.expected.update({
            "'input'", "'output'", "'state'", "'reset'", "'timer'", "'logical'",
            "'physical'", "'reaction'", "'mode'", "'initial'", "identifier", "'}'",
        })
        self.fail()

    def state(self, reset: bool) -> ast.StateDecl:
        self.expect_kw("state")
        name = self.ident("state variable name")
        self.expect(":")
        self.expect_kw("real")
        self.expect("=")
        if self.at("ID") and self.tok.text not in KEYWORDS:
            init = self.advance().text
        else:
            init = self.signed_number()
        self.accept(";")
        return ast.StateDecl(name.text, init, reset, name.loc)

    def ref(self) -> ast.Ref:
        first = self.ident()
        if self.accept("."):
            second = self.ident()
            return ast.Ref(first.text, second.text, first.loc)
        return ast.Ref(None, first.text, first.loc)

    def trigger(self) -> ast.Ref:
        t = self.tok
        for word in ("startup", "shutdown", "reset"):
            if self.accept_kw(word):
                return ast.Ref(None, word, t.loc)
        return self.ref()

    def effect(self):
        t = self.tok
        for kind in ("reset", "history"):
            if self.accept_kw(kind):
                self.expect("(")
                mode = self.ident("mode name").text
                self.expect(")")
                return ast.ModeEffect(kind, mode, t.loc)
        return self.ref()

    def reaction(self) -> ast.ReactionDecl:
        start = self.expect_kw("reaction")
        self.expect("(")
        triggers = [self.trigger()]
        while self.accept(","):
            triggers.append(self.trigger())
        self.expect(")")
        sources = []
        if self.at("ID") and self.tok.text not in KEYWORDS:
            sources.append(self.ref())
            while self.accept(","):
                sources.append(self.ref())
        effects = []
        if self.accept("->"):
            effects.append(self.effect())
            while self.accept(","):
                effects.append(self.effect())
        if self.at("CODE"):
            code = self.advance()
            body = parse_script(code.text, code.body_loc)
        elif self.accept_kw("extern"):
            body = ast.Extern(self.expect("STRING").text)
            self.accept(";")
        else:
            self.fail()
        index = self._reaction_index
        self._reaction_index += 1
        return ast.ReactionDecl(index, triggers, sources, effects, body, start.loc)

    def instantiation(self) -> ast.Instantiation:
        name = self.ident("instance name")
        self.expect("=")
        self.expect_kw("new")
        cls = self.ident("reactor class").text
        self.expect("(")
        args = []
        while not self.at(")"):
            pname = self.ident("parameter name").text
            self.expect("=")
            if self.at("NUMBER") and self.peek().kind == "ID" and self.peek().text in UNITS:
                args.append((pname, self.duration_literal()))
            else:
                args.append((pname, self.signed_number()))
            if not self.accept(","):
                break
        self.expect(")")
        self.accept(";")
        return ast.Instantiation(name.text, cls, args, name.loc)

    def connection(self) -> ast.ConnectionDecl:
        src = self.ref()
        self.expect("->")
        dst = self.ref()
        delay = None
        if self.accept_kw("after"):
            delay = self.time_value()
        self.accept(";")
        return ast.ConnectionDecl(src, dst, delay, src.loc)


def parse(text: str, file: str = "<input>") -> ast.Program:
    """Parse program text; raises :class:`ParseError` on the first syntax error."""
    return ProgramParser(tokenize(text, file), file).parse()

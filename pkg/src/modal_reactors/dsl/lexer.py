from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import Diagnostic, Location, ParseError

PUNCT = [
    "{=", "=}", "->", "<=", ">=", "==", "!=", "&&", "||",
    "{", "}", "(", ")", "[", "]", ",", ";", ":", ".",
    "=", "+", "-", "*", "/", "<", ">", "!",
]

_NUMBER = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_STRING = re.compile(r'"([^"\\\n]|\\.)*"')


@dataclass(frozen=True)
class Token:
    kind: str  # ID, NUMBER, STRING, CODE, EOF, or the punctuation itself
    text: str
    loc: Location
    body_loc: Location | None = None  # where a CODE token's text begins

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "CODE":
            return "code block"
        return repr(self.text)


def tokenize(text: str, file: str = "<input>", line: int = 1, col: int = 1) -> list[Token]:
    """Split ``text`` into tokens; ``line``/``col`` give the origin of ``text``."""
    toks: list[Token] = []
    i, n = 0, len(text)

    def here() -> Location:
        return Location(line, col, file)

    def advance(k: int) -> None:
        nonlocal i, line, col
        chunk = text[i:i + k]
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += k
        i += k

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if text.startswith("//", i) or c == "#":
            j = text.find("\n", i)
            advance((n if j < 0 else j) - i)
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ParseError(Diagnostic("SYNTAX", "unterminated comment", here()))
            advance(j + 2 - i)
            continue
        start = here()
        if text.startswith("{=", i):
            j = text.find("=}", i + 2)
            if j < 0:
                raise ParseError(Diagnostic("SYNTAX", "unterminated code block '{='", start))
            advance(2)
            body_loc = here()
            body = text[i:j]
            advance(j - i + 2)
            toks.append(Token("CODE", body, start, body_loc))
            continue
        m = _NUMBER.match(text, i)
        if m and (c.isdigit() or c == "."):
            toks.append(Token("NUMBER", m.group(0), start))
            advance(len(m.group(0)))
            continue
        m = _IDENT.match(text, i)
        if m:
            toks.append(Token("ID", m.group(0), start))
            advance(len(m.group(0)))
            continue
        if c == '"':
            m = _STRING.match(text, i)
            if not m:
                raise ParseError(Diagnostic("SYNTAX", "unterminated string", start))
            toks.append(Token("STRING", m.group(0)[1:-1], start))
            advance(len(m.group(0)))
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                toks.append(Token(p, p, start))
                advance(len(p))
                break
        else:
            raise ParseError(Diagnostic("SYNTAX", f"unexpected character {c!r}", start))
    toks.append(Token("EOF", "", here()))
    return toks

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Location:
    line: int
    col: int
    file: str = field(default="<input>", compare=False)

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    loc: Location | None = None

    def render(self, file: str | None = None) -> str:
        if self.loc is None:
            return f"error[{self.code}]: {self.message}"
        where = f"{file or self.loc.file}:{self.loc.line}:{self.loc.col}"
        return f"error[{self.code}] {where}: {self.message}"

    def __str__(self) -> str:
        return self.render()


class ReactorError(Exception):
    """Fatal error raised while elaborating or executing a program."""


class ParseError(ReactorError):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


class ValidationError(ReactorError):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("\n".join(d.render() for d in diagnostics))
        self.diagnostics = list(diagnostics)

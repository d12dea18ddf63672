"""Execution traces: one ``|``-separated record per line."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from ..timecore import Tag

KINDS = ("STARTUP", "SHUTDOWN", "RESET", "TIMER", "ACTION", "REACTION", "OUTPUT", "MODE_SWITCH")
_ORDINAL = {k: i for i, k in enumerate(KINDS)}


def _num(x) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0 into 0


def format_value(v) -> str:
    if isinstance(v, tuple):
        return "[" + ",".join(_num(x) for x in v) + "]"
    return _num(v)


@dataclass(frozen=True)
class Record:
    tag: Tag
    kind: str
    qname: str
    detail: str = ""

    def render(self) -> str:
        return f"{self.tag.time}|{self.tag.microstep}|{self.kind}|{self.qname}|{self.detail}"

    @property
    def fields(self) -> dict[str, str]:
        """``key=value`` pairs of the detail column."""
        out = {}
        for part in self.detail.split(" "):
            k, sep, v = part.partition("=")
            if sep:
                out[k] = v
        return out

    @classmethod
    def parse(cls, line: str) -> Record:
        t, m, kind, qname, detail = line.split("|", 4)
        return cls(Tag(int(t), int(m)), kind, qname, detail)


class Trace:
    def __init__(self, records=None):
        self.records: list[Record] = list(records or [])

    def add(self, tag: Tag, kind: str, qname: str, detail: str = "") -> None:
        self.records.append(Record(tag, kind, qname, detail))

    def finalize(self) -> None:
        # stable: keeps emission order among records with equal keys
        self.records.sort(key=lambda r: (r.tag.time, r.tag.microstep, _ORDINAL[r.kind], r.qname))

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def select(self, kind: str | None = None, qname: str | None = None) -> list[Record]:
        return [r for r in self.records
                if (kind is None or r.kind == kind) and (qname is None or r.qname == qname)]

    def render(self) -> str:
        return "".join(r.render() + "\n" for r in self.records)

    @classmethod
    def parse(cls, text: str) -> Trace:
        return cls(Record.parse(line) for line in text.splitlines() if line)

    def to_csv(self) -> str:
        """OUTPUT records as ``t_seconds,reactor,port,value`` rows.

        Vector payloads become one row per element, ``port[i]``.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_seconds", "reactor", "port", "value"])
        for r in self.select("OUTPUT"):
            f = r.fields
            secs, nanos = divmod(r.tag.time, 1_000_000_000)
            seconds = f"{secs}.{nanos:09d}"
            value = f["value"]
            if value.startswith("["):
                for i, x in enumerate(value[1:-1].split(",")):
                    w.writerow([seconds, r.qname, f"{f['port']}[{i}]", x])
            else:
                w.writerow([seconds, r.qname, f["port"], value])
        return buf.getvalue()

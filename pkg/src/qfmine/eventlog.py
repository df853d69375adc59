"""CSV event logs of simulations and their activity encoding.

One simulation is one case. Every row is a step record; the activity used
for mining is the action together with its source and target state so that
the same action taken from different states stays distinguishable.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Sequence
from xml.sax.saxutils import quoteattr

from .errors import DecodeError, LogFormatError
from .rational import format_rational, parse_rational
from .simulator import StepRecord

__all__ = [
    "HEADER",
    "SEP",
    "EventLog",
    "LogWriter",
    "write_log",
    "read_log",
    "format_row",
    "encode",
    "decode",
    "preprocess",
    "write_xes",
]

HEADER = ("step", "caseId", "action", "source", "target", "installed", "vars")
SEP = "##"


def format_row(rec: StepRecord) -> list[str]:
    return [
        str(rec.step),
        str(rec.case_id),
        rec.action,
        rec.source,
        rec.target,
        ";".join(rec.installed),
        _format_vars(rec.vars),
    ]


@lru_cache(maxsize=65536)
def _format_vars(vars_: tuple) -> str:
    return ";".join(f"{k}={format_rational(v)}" for k, v in vars_)


def _writer(f):
    return csv.writer(f, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)


class LogWriter:
    """Streaming log writer; cases must arrive in ascending caseId.

    Used as a context manager. If the block raises, the partial file is
    removed.
    """

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._f = open(self.path, "w", encoding="utf-8", newline="")
        self._w = _writer(self._f)
        self._w.writerow(HEADER)
        self.cases = 0
        self._last: int | None = None

    def write_case(self, records: Sequence[StepRecord]) -> None:
        if not records:
            return
        cid = records[0].case_id
        if self._last is not None and cid <= self._last:
            raise ValueError(f"case {cid} written after case {self._last}")
        self._last = cid
        self._w.writerows(format_row(r) for r in records)
        self.cases += 1

    def close(self) -> None:
        if not self._f.closed:
            self._f.close()

    def discard(self) -> None:
        self.close()
        self.path.unlink(missing_ok=True)

    def __enter__(self) -> "LogWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            self.discard()
        else:
            self.close()


def write_log(path: str | os.PathLike, cases: Iterable[Sequence[StepRecord]]) -> None:
    """Write ``cases`` sorted by caseId; each case is already in step order."""
    ordered = sorted((c for c in cases if c), key=lambda c: c[0].case_id)
    with LogWriter(path) as w:
        for case in ordered:
            w.write_case(case)


def _parse_vars(text: str, line: int) -> tuple:
    if not text:
        return ()
    out = []
    for item in text.split(";"):
        name, eq, value = item.partition("=")
        if not eq or not name:
            raise LogFormatError(f"bad variable entry {item!r}", line)
        try:
            out.append((name, parse_rational(value)))
        except ValueError:
            raise LogFormatError(f"bad value {value!r} for {name}", line) from None
    return tuple(out)


def read_log(path: str | os.PathLike) -> list[list[StepRecord]]:
    """Read a log written by :func:`write_log`.

    Raises:
        LogFormatError: wrong header, malformed row, or rows out of order.
    """
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise LogFormatError("empty file: missing header", 1) from None
    if tuple(header) != HEADER:
        raise LogFormatError(f"expected header {','.join(HEADER)}", 1)
    cases: list[list[StepRecord]] = []
    inst_cache: dict[str, tuple[str, ...]] = {}
    vars_cache: dict[str, tuple] = {}
    width = len(HEADER)
    for row in reader:
        line = reader.line_num
        if len(row) != width:
            raise LogFormatError(f"expected {width} columns, got {len(row)}", line)
        try:
            step, cid = int(row[0]), int(row[1])
        except ValueError:
            raise LogFormatError("step and caseId must be integers", line) from None
        installed = inst_cache.get(row[5])
        if installed is None:
            installed = inst_cache[row[5]] = tuple(row[5].split(";")) if row[5] else ()
        vars_ = vars_cache.get(row[6])
        if vars_ is None:
            vars_ = vars_cache[row[6]] = _parse_vars(row[6], line)
        rec = StepRecord(step, cid, row[2], row[3], row[4], installed, vars_)
        if cases and cases[-1][-1].case_id == cid:
            if step <= cases[-1][-1].step:
                raise LogFormatError(f"step {step} does not follow step {cases[-1][-1].step}", line)
            cases[-1].append(rec)
        else:
            if cases and cid < cases[-1][-1].case_id:
                raise LogFormatError(f"case {cid} is out of order", line)
            cases.append([rec])
    return cases


# -- activity encoding --------------------------------------------------------


def encode(action: str, source: str, target: str) -> str:
    for part in (action, source, target):
        if SEP in part:
            raise DecodeError(f"{part!r} contains the reserved separator {SEP!r}")
        if not part:
            raise DecodeError("empty action or state name")
    return f"{action}{SEP}{source}{SEP}{target}"


def decode(activity: str) -> tuple[str, str, str]:
    parts = activity.split(SEP)
    if len(parts) != 3 or not all(parts):
        raise DecodeError(f"{activity!r} is not an action{SEP}source{SEP}target activity")
    return parts[0], parts[1], parts[2]


@dataclass
class EventLog:
    """Preprocessed log: one activity sequence per case."""

    traces: list[tuple[int, list[str]]] = field(default_factory=list)

    def events(self) -> Iterator[tuple[int, str, int]]:
        """``(caseId, activity, orderIndex)`` triples in log order."""
        for cid, acts in self.traces:
            for i, a in enumerate(acts):
                yield cid, a, i

    @property
    def activities(self) -> set[str]:
        return {a for _, acts in self.traces for a in acts}

    def __len__(self) -> int:
        return len(self.traces)


def preprocess(cases: Iterable[Sequence[StepRecord]]) -> EventLog:
    return EventLog([
        (case[0].case_id, [encode(r.action, r.source, r.target) for r in case])
        for case in cases
        if case
    ])


def write_xes(log: EventLog, path: str | os.PathLike) -> None:
    """Minimal XES export (trace per case, ``concept:name`` per event)."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<log xes.version="1.0" xmlns="http://www.xes-standard.org/">',
        '  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>',
    ]
    for cid, acts in log.traces:
        lines.append("  <trace>")
        lines.append(f'    <string key="concept:name" value="{cid}"/>')
        for a in acts:
            lines.append(f'    <event><string key="concept:name" value={quoteattr(a)}/></event>')
        lines.append("  </trace>")
    lines.append("</log>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

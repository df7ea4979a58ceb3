"""Telemetry wire format: line-protocol parsing/serialization and job events.

Grammar (one logical line, no trailing newline):

    measurement[,tagkey=tagval...] fieldkey=fieldval[,...] [timestamp_ns]

Backslash escapes comma/space/equals/backslash in measurement, tag keys,
tag values and field keys. String field values are double-quoted with
backslash escapes for quote and backslash. Integer fields carry an `i`
suffix, booleans are t/f/true/false (any of the usual casings), anything
else must parse as a finite float. The timestamp is integer nanoseconds
since the Unix epoch; when absent, the caller-supplied receipt time is
stamped instead.
"""

from __future__ import annotations

import json
import math
import re
import time
from dataclasses import dataclass
from typing import Union

FieldValue = Union[float, int, bool, str]

MAX_STRING_FIELD = 64 * 1024

_TRUE = frozenset(("t", "T", "true", "True", "TRUE"))
_FALSE = frozenset(("f", "F", "false", "False", "FALSE"))
_ESCAPABLE = frozenset(("\\", ",", " ", "="))


class LineProtocolError(ValueError):
    """Parse failure; `offset` is the byte position within the line."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"parse error at byte {offset}: {message}")
        self.offset = offset


class JobEventError(ValueError):
    """Invalid job event; `key` names the offending JSON key."""

    def __init__(self, message: str, key: str):
        super().__init__(message)
        self.key = key


@dataclass(slots=True)
class MetricSample:
    measurement: str
    tags: dict[str, str]
    fields: dict[str, FieldValue]
    timestamp: int


@dataclass(slots=True)
class JobEvent:
    job_id: str
    user: str
    nodes: list[str]
    event: str  # "start" | "end"
    ts_ns: int


def parse_line(line: str, receipt_ns: int | None = None) -> MetricSample:
    """Parse one line. Escape-free lines (quoted strings included) take the
    fast path; anything suspicious goes through the offset-tracking scanner."""
    if "\\" in line:
        return _parse_scan(line, receipt_ns)
    try:
        return _parse_fast(line, receipt_ns)
    except LineProtocolError:
        raise
    except Exception:
        return _parse_scan(line, receipt_ns)  # re-parse for a precise offset


_FIELD_TOKEN = re.compile(r'([^,= ]+)=("(?:[^"\\]|\\.)*"|[^," ]+)')


def _parse_quoted_fields(fields_str: str) -> dict[str, FieldValue]:
    """Field section containing quoted strings (no backslashes in line)."""
    fields: dict[str, FieldValue] = {}
    pos, n = 0, len(fields_str)
    while True:
        m = _FIELD_TOKEN.match(fields_str, pos)
        if m is None:
            raise ValueError
        k, v = m.group(1), m.group(2)
        if k in fields:
            raise ValueError
        if v[0] == '"':
            s = v[1:-1]
            # cheap length gate first; the byte limit is what the cap means
            if len(s) > MAX_STRING_FIELD // 4 and len(s.encode()) > MAX_STRING_FIELD:
                raise ValueError
            fields[k] = s
        else:
            fields[k] = _classify_bare(v)
        pos = m.end()
        if pos == n:
            return fields
        if fields_str[pos] != ",":
            raise ValueError
        pos += 1


def _parse_fast(line: str, receipt_ns: int | None) -> MetricSample:
    head, _, rest = line.partition(" ")
    fields_str, sep, ts_str = rest.partition(" ")
    parts = head.split(",")
    measurement = parts[0]
    if not measurement:
        raise ValueError
    tags: dict[str, str] = {}
    for kv in parts[1:]:
        k, eq, v = kv.partition("=")
        if not k or not eq or not v or "=" in v or k in tags:
            raise ValueError
        tags[k] = v
    if not fields_str:
        raise ValueError
    fields: dict[str, FieldValue]
    if '"' in fields_str:
        if fields_str.count('"') % 2:  # a quoted string holding a space
            raise ValueError
        fields = _parse_quoted_fields(fields_str)
    else:
        fields = {}
        for kv in fields_str.split(","):
            k, eq, v = kv.partition("=")
            if not k or not eq or not v or k in fields:
                raise ValueError
            fields[k] = _classify_bare(v)
    if ts_str:
        timestamp = int(ts_str)
    elif sep:
        raise ValueError  # dangling separator after the field set
    else:
        timestamp = receipt_ns if receipt_ns is not None else time.time_ns()
    return MetricSample(measurement, tags, fields, timestamp)


def _classify_bare(tok: str) -> FieldValue:
    if tok[-1] == "i":
        return int(tok[:-1])
    if tok in _TRUE:
        return True
    if tok in _FALSE:
        return False
    v = float(tok)
    if not math.isfinite(v):
        raise ValueError
    return v


class _Scanner:
    """Character scanner with escape handling and byte-offset errors."""

    def __init__(self, line: str):
        self.line = line
        self.pos = 0
        self.n = len(line)

    def fail(self, message: str, offset: int | None = None):
        raise LineProtocolError(message, self.pos if offset is None else offset)

    def read_escaped(self, stops: str, what: str) -> str:
        """Read until an unescaped stop char, space, or end of line."""
        out = []
        line, n = self.line, self.n
        while self.pos < n:
            ch = line[self.pos]
            if ch == "\\":
                if self.pos + 1 >= n or line[self.pos + 1] not in _ESCAPABLE:
                    self.fail(f"malformed escape in {what}")
                out.append(line[self.pos + 1])
                self.pos += 2
                continue
            if ch in stops:
                break
            out.append(ch)
            self.pos += 1
        return "".join(out)

    def expect(self, ch: str, what: str):
        if self.pos >= self.n or self.line[self.pos] != ch:
            self.fail(f"expected {ch!r} {what}")
        self.pos += 1


def _parse_scan(line: str, receipt_ns: int | None) -> MetricSample:
    sc = _Scanner(line)
    measurement = sc.read_escaped(", ", "measurement")
    if not measurement:
        sc.fail("empty measurement", 0)

    tags: dict[str, str] = {}
    while sc.pos < sc.n and line[sc.pos] == ",":
        sc.pos += 1
        key_at = sc.pos
        key = sc.read_escaped(",= ", "tag key")
        if not key:
            sc.fail("empty tag key")
        sc.expect("=", "after tag key")
        value = sc.read_escaped(",= ", "tag value")
        if not value:
            sc.fail("empty tag value")
        if key in tags:
            sc.fail(f"duplicate tag key {key!r}", key_at)
        tags[key] = value

    sc.expect(" ", "before field set")
    if sc.pos >= sc.n or line[sc.pos] in " ,":
        sc.fail("empty field set")

    fields: dict[str, FieldValue] = {}
    while True:
        key_at = sc.pos
        key = sc.read_escaped(",= ", "field key")
        if not key:
            sc.fail("empty field key")
        sc.expect("=", "after field key")
        if key in fields:
            sc.fail(f"duplicate field key {key!r}", key_at)
        fields[key] = _scan_field_value(sc)
        if sc.pos < sc.n and line[sc.pos] == ",":
            sc.pos += 1
            continue
        break

    timestamp: int
    if sc.pos < sc.n:
        sc.expect(" ", "before timestamp")
        ts_at = sc.pos
        ts_str = line[sc.pos :]
        sc.pos = sc.n
        try:
            timestamp = int(ts_str)
        except ValueError:
            raise LineProtocolError(f"non-numeric timestamp {ts_str!r}", ts_at) from None
    else:
        timestamp = receipt_ns if receipt_ns is not None else time.time_ns()
    return MetricSample(measurement, tags, fields, timestamp)


def _scan_field_value(sc: _Scanner) -> FieldValue:
    line = sc.line
    at = sc.pos
    if at < sc.n and line[at] == '"':
        sc.pos += 1
        out = []
        while True:
            if sc.pos >= sc.n:
                sc.fail("unterminated string field", at)
            ch = line[sc.pos]
            if ch == "\\":
                if sc.pos + 1 >= sc.n or line[sc.pos + 1] not in ('"', "\\"):
                    sc.fail("malformed escape in string field")
                out.append(line[sc.pos + 1])
                sc.pos += 2
                continue
            if ch == '"':
                sc.pos += 1
                break
            out.append(ch)
            sc.pos += 1
        s = "".join(out)
        if len(s.encode()) > MAX_STRING_FIELD:
            sc.fail(f"string field exceeds {MAX_STRING_FIELD} bytes", at)
        return s
    end = sc.pos
    while end < sc.n and line[end] not in ", ":
        end += 1
    tok = line[sc.pos : end]
    sc.pos = end
    if not tok:
        raise LineProtocolError("empty field value", at)
    try:
        return _classify_bare(tok)
    except ValueError:
        raise LineProtocolError(f"bad field value {tok!r}", at) from None


def parse_batch(
    text: str, receipt_ns: int | None = None
) -> tuple[list[MetricSample], list[tuple[int, LineProtocolError]]]:
    """Parse newline-separated lines independently.

    Blank lines and `#` comment lines are skipped; failures are collected
    as (1-based line number, error) and never abort the batch.
    """
    samples: list[MetricSample] = []
    errors: list[tuple[int, LineProtocolError]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line and line[-1] == "\r":
            line = line[:-1]
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            samples.append(parse_line(line, receipt_ns))
        except LineProtocolError as err:
            errors.append((lineno, err))
    return samples, errors


def _escape_name(s: str) -> str:
    return s.replace("\\", "\\\\").replace(",", "\\,").replace(" ", "\\ ").replace("=", "\\=")


def _format_value(v: FieldValue) -> str:
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, int):
        return f"{v}i"
    if isinstance(v, float):
        return repr(v)
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_sample(sample: MetricSample) -> str:
    """Emit one line that parse_line maps back to an equal sample."""
    parts = [_escape_name(sample.measurement)]
    for k, v in sample.tags.items():
        parts.append(f",{_escape_name(k)}={_escape_name(v)}")
    parts.append(" ")
    parts.append(",".join(f"{_escape_name(k)}={_format_value(v)}" for k, v in sample.fields.items()))
    parts.append(f" {sample.timestamp}")
    return "".join(parts)


def serialize_batch(samples: list[MetricSample]) -> str:
    return "\n".join(serialize_sample(s) for s in samples)


_JOB_KEYS = ("job_id", "user", "nodes", "event", "ts_ns")


def parse_job_event(json_text: str) -> JobEvent:
    """Parse one JSON job event: {job_id, user, nodes, event, ts_ns}."""
    try:
        obj = json.loads(json_text)
    except json.JSONDecodeError as err:
        raise JobEventError(f"invalid JSON: {err}", key="") from None
    if not isinstance(obj, dict):
        raise JobEventError("job event must be a JSON object", key="")
    for key in _JOB_KEYS:
        if key not in obj:
            raise JobEventError(f"missing key {key!r}", key=key)
    event = obj["event"]
    if event not in ("start", "end"):
        raise JobEventError(f"unknown event kind {event!r}", key="event")
    nodes = obj["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise JobEventError("nodes must be a list of node ids", key="nodes")
    if event == "start" and not nodes:
        raise JobEventError("start event requires a non-empty nodes list", key="nodes")
    return JobEvent(
        job_id=str(obj["job_id"]),
        user=str(obj["user"]),
        nodes=list(nodes),
        event=event,
        ts_ns=int(obj["ts_ns"]),
    )


def serialize_job_event(ev: JobEvent) -> str:
    return json.dumps(
        {"job_id": ev.job_id, "user": ev.user, "nodes": ev.nodes, "event": ev.event, "ts_ns": ev.ts_ns},
        separators=(",", ":"),
    )

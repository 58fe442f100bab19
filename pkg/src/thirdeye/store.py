"""Trace persistence, querying and summary reports.

A loaded trace is immutable: every record is decoded, schema-validated and
checked for gap-free sequence numbers and non-decreasing timestamps before
anything downstream sees it. Queries are a deliberately small predicate
language evaluated by a full scan; the scan is the semantics, there is no
index to disagree with it.
"""

import io
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import access_events
from .errors import (
    BadQueryOperator,
    MalformedRecord,
    QueryKindMismatch,
    SchemaViolation,
    SeqGap,
    TimestampRegression,
    UnknownPropertyInPredicate,
)
from .events import Event, SchemaRegistry
from .globs import glob_match
from .wire import decode_record, encode_event, format_header, parse_header

COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=", "glob")

_OP_ALIASES = {"≠": "!=", "≤": "<=", "≥": ">=", "==": "="}


@dataclass(frozen=True)
class TraceHeader:
    epoch: str  # ISO-8601 wall-clock text, kept verbatim for round-trips


@dataclass
class Trace:
    header: TraceHeader
    events: list[Event]
    registry: SchemaRegistry


def _read_text(source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_trace(source, registry: SchemaRegistry) -> Trace:
    """Load and fully check a trace from a path, bytes or stream."""
    text = _read_text(source)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedRecord("empty input, expected a v1 trace header", line_no=1)
    header = TraceHeader(parse_header(lines[0]))

    events: list[Event] = []
    previous_ts: int | None = None
    for line_no, line in enumerate(lines[1:], start=2):
        event = decode_record(registry, line, line_no=line_no)
        issues = registry.validate(event)
        if issues:
            raise SchemaViolation(
                f"line {line_no}: " + "; ".join(str(i) for i in issues), line_no
            )
        expected_seq = len(events) + 1
        if event.seq != expected_seq:
            raise SeqGap(
                f"line {line_no}: seq {event.seq}, expected {expected_seq}", line_no
            )
        if previous_ts is not None and event.timestamp < previous_ts:
            raise TimestampRegression(
                f"line {line_no}: timestamp {event.timestamp} < {previous_ts}", line_no
            )
        previous_ts = event.timestamp
        events.append(event)
    return Trace(header, events, registry)


def save_trace(trace: Trace, target) -> None:
    """Write the trace back out in the canonical file format."""
    buffer = io.BytesIO()
    buffer.write(format_header(trace.header.epoch))
    for event in trace.events:
        buffer.write(encode_event(trace.registry, event))
    data = buffer.getvalue()
    if isinstance(target, (str, Path)):
        Path(target).write_bytes(data)
    else:
        target.write(data)


# --- queries ---------------------------------------------------------------------


@dataclass(frozen=True)
class Predicate:
    """One `property OP literal` condition."""

    prop: str
    op: str
    literal: object

    def __post_init__(self):
        op = _OP_ALIASES.get(self.op, self.op)
        if op not in COMPARISON_OPS:
            raise BadQueryOperator(f"unknown operator {self.op!r}")
        object.__setattr__(self, "op", op)


@dataclass(frozen=True)
class Query:
    type_filter: frozenset[str] | None = None
    predicates: tuple[Predicate, ...] = ()
    time_range: tuple[int, int] | None = None


def _literal_fits(kind: str, literal) -> bool:
    if kind == "string":
        return isinstance(literal, str)
    if kind == "boolean":
        return isinstance(literal, bool)
    return isinstance(literal, int) and not isinstance(literal, bool)


def _kinds_for(registry: SchemaRegistry, type_names, prop: str) -> set[str]:
    kinds = set()
    for name in type_names:
        for spec in registry.resolved_properties(name):
            if spec.name == prop:
                kinds.add(spec.kind)
    return kinds


def _check_query(registry: SchemaRegistry, query: Query) -> None:
    type_names = query.type_filter if query.type_filter is not None else registry.type_names()
    for predicate in query.predicates:
        kinds = _kinds_for(registry, type_names, predicate.prop)
        if not kinds:
            raise UnknownPropertyInPredicate(
                f"property {predicate.prop!r} is not declared by any filtered type"
            )
        if not any(_literal_fits(kind, predicate.literal) for kind in kinds):
            raise QueryKindMismatch(
                f"literal {predicate.literal!r} fits none of the kinds {sorted(kinds)} "
                f"declared for {predicate.prop!r}"
            )


def _event_value(event: Event, registry: SchemaRegistry, prop: str):
    """(kind, value) of a property on this event, or None when not present."""
    if prop == "timestamp":
        return "timestamp", event.timestamp
    if prop == "source_location":
        return "string", event.source_location
    for spec in registry.declared_properties(event.type_name):
        if spec.name == prop:
            if prop in event.properties:
                return spec.kind, event.properties[prop]
            return None
    return None


def _apply(predicate: Predicate, kind: str, value) -> bool:
    if not _literal_fits(kind, predicate.literal):
        raise QueryKindMismatch(
            f"property {predicate.prop!r} has kind {kind}, literal is {predicate.literal!r}"
        )
    op, literal = predicate.op, predicate.literal
    if op == "=":
        return value == literal
    if op == "!=":
        return value != literal
    if op == "glob":
        if kind != "string":
            raise QueryKindMismatch(f"glob needs a string property, {predicate.prop!r} is {kind}")
        return glob_match(literal, value)
    if kind == "boolean":
        raise QueryKindMismatch(f"ordering comparison on boolean property {predicate.prop!r}")
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    return value >= literal


def run_query(trace: Trace, query: Query) -> list[Event]:
    """Every event satisfying the filter, the predicates and the time
    window, in seq order. Events lacking a predicate's property never match."""
    _check_query(trace.registry, query)
    out = []
    for event in trace.events:
        if query.type_filter is not None and event.type_name not in query.type_filter:
            continue
        if query.time_range is not None:
            t0, t1 = query.time_range
            if not t0 <= event.timestamp <= t1:
                continue
        ok = True
        for predicate in query.predicates:
            found = _event_value(event, trace.registry, predicate.prop)
            if found is None or not _apply(predicate, *found):
                ok = False
                break
        if ok:
            out.append(event)
    return out


def parse_predicate(text: str, registry: SchemaRegistry) -> Predicate:
    """Parse a CLI `prop OP literal` string; the literal's type follows the
    property's declared kind (string unless every declaration disagrees)."""
    parts = text.split(None, 2)
    if len(parts) != 3:
        raise BadQueryOperator(f"predicate must be 'prop OP literal', got {text!r}")
    prop, op, literal_text = parts
    op = _OP_ALIASES.get(op, op)
    kinds = _kinds_for(registry, registry.type_names(), prop)
    if not kinds:
        raise UnknownPropertyInPredicate(f"property {prop!r} is not declared by any type")
    literal: object = literal_text
    if literal_text.startswith('"') and literal_text.endswith('"') and len(literal_text) >= 2:
        literal = literal_text[1:-1]
    elif kinds & {"integer", "timestamp"}:
        if re.fullmatch(r"-?[0-9]+", literal_text):
            literal = int(literal_text)
    if "boolean" in kinds and literal_text in ("true", "false"):
        literal = literal_text == "true"
    return Predicate(prop, op, literal)


# --- reports ----------------------------------------------------------------------


@dataclass
class Report:
    """Prefabricated statistics over one trace."""

    total_events: int = 0
    per_type: dict = field(default_factory=dict)
    requests_by_location: dict = field(default_factory=dict)
    granted: int = 0
    denied: int = 0
    first_timestamp: int | None = None
    last_timestamp: int | None = None


def summarize(trace: Trace) -> Report:
    per_type: Counter = Counter()
    by_location: Counter = Counter()
    granted = denied = 0
    for event in trace.events:
        per_type[event.type_name] += 1
        if event.type_name == access_events.ACCESS_REQUEST:
            by_location[event.properties["location"]] += 1
            if event.properties["access_code"] == access_events.GRANTED_CODE:
                granted += 1
            else:
                denied += 1
    events = trace.events
    return Report(
        total_events=len(events),
        per_type=dict(sorted(per_type.items())),
        requests_by_location=dict(sorted(by_location.items())),
        granted=granted,
        denied=denied,
        first_timestamp=events[0].timestamp if events else None,
        last_timestamp=events[-1].timestamp if events else None,
    )


def report_kv_lines(report: Report) -> list[str]:
    lines = [f"total_events={report.total_events}"]
    lines += [f"type.{name}={count}" for name, count in report.per_type.items()]
    lines += [f"location.{loc}={count}" for loc, count in report.requests_by_location.items()]
    lines.append(f"granted={report.granted}")
    lines.append(f"denied={report.denied}")
    lines.append(f"first_timestamp_ns={'' if report.first_timestamp is None else report.first_timestamp}")
    lines.append(f"last_timestamp_ns={'' if report.last_timestamp is None else report.last_timestamp}")
    return lines


def render_report(report: Report) -> str:
    """Aligned, human-facing view of the same numbers."""
    rows: list[tuple[str, str]] = [("total events", str(report.total_events))]
    for name, count in report.per_type.items():
        rows.append((f"  {name}", str(count)))
    if report.requests_by_location:
        rows.append(("requests by location", ""))
        for loc, count in report.requests_by_location.items():
            rows.append((f"  {loc}", str(count)))
    rows.append(("granted", str(report.granted)))
    rows.append(("denied", str(report.denied)))
    if report.first_timestamp is not None:
        rows.append(("first timestamp (ns)", str(report.first_timestamp)))
        rows.append(("last timestamp (ns)", str(report.last_timestamp)))
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}".rstrip() for label, value in rows)

"""thirdeye: typed event tracing with trace-driven access-policy validation."""

__version__ = "0.1.0"

from .events import Event, EventType, PropertySpec, SchemaRegistry, parse_schema_text
from .hosts import HostMap
from .policy import (
    Decision,
    Directive,
    DirectiveKind,
    HostPattern,
    Ordering,
    PolicySnapshot,
    RequestHost,
    decide,
    match_host,
    parse_config,
)
from .runtime import (
    FileSink,
    ManualClock,
    MemorySink,
    ReportResult,
    SocketSink,
    Tracer,
    TracingState,
    parse_sink_spec,
)
from .store import Predicate, Query, Report, Trace, load_trace, run_query, save_trace, summarize
from .validator import ValidationResult, Violation, explain, snapshot_at, validate_trace

__all__ = [
    "Decision",
    "Directive",
    "DirectiveKind",
    "Event",
    "EventType",
    "FileSink",
    "HostMap",
    "HostPattern",
    "ManualClock",
    "MemorySink",
    "Ordering",
    "PolicySnapshot",
    "Predicate",
    "PropertySpec",
    "Query",
    "Report",
    "ReportResult",
    "RequestHost",
    "SchemaRegistry",
    "SocketSink",
    "Trace",
    "Tracer",
    "TracingState",
    "ValidationResult",
    "Violation",
    "decide",
    "explain",
    "load_trace",
    "match_host",
    "parse_config",
    "parse_schema_text",
    "parse_sink_spec",
    "run_query",
    "save_trace",
    "snapshot_at",
    "summarize",
    "validate_trace",
]

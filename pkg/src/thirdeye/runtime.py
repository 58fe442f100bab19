"""In-process event reporter.

The tracer applies the current tracing state as an emission filter, assigns
sequence numbers and timestamps under one lock, and appends encoded records
to a sink. Filtered reports never construct an event; that is the overhead
contract. Every state change is itself emitted as a built-in
``Tracing_state_changed`` event so traces are self-describing.
"""

import socket
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .errors import ThirdEyeError, UnknownEventTypeInState
from .events import EventType, PropertySpec, SchemaRegistry
from .wire import encode_event, format_header

TRACING_STATE_CHANGED = "Tracing_state_changed"

TRACING_STATE_CHANGED_TYPE = EventType(
    TRACING_STATE_CHANGED,
    properties=(
        PropertySpec("state", "string"),
        PropertySpec("enabled", "string"),
    ),
)

TRACER_SOURCE_LOCATION = "tracer"


@dataclass(frozen=True)
class TracingState:
    """A named set of enabled event types. Enabling a type enables all of
    its descendants; the built-in state-change type is always enabled."""

    name: str
    enabled_types: frozenset[str] = frozenset()

    @classmethod
    def of(cls, name: str, *type_names: str) -> "TracingState":
        return cls(name, frozenset(type_names))


class ReportResult(Enum):
    EMITTED = "emitted"
    FILTERED = "filtered"


@dataclass
class ReporterStats:
    """Accounting for report() calls; built-in state-change emissions are
    not report attempts and are excluded."""

    emitted: int = 0
    filtered: int = 0
    emitted_by_type: Counter = field(default_factory=Counter)
    filtered_by_type: Counter = field(default_factory=Counter)

    @property
    def attempts(self) -> int:
        return self.emitted + self.filtered

    def as_dict(self) -> dict:
        return {
            "emitted": self.emitted,
            "filtered": self.filtered,
            "attempts": self.attempts,
            "emitted_by_type": dict(self.emitted_by_type),
            "filtered_by_type": dict(self.filtered_by_type),
        }


# --- sinks --------------------------------------------------------------------


class MemorySink:
    """Keeps the raw trace bytes in memory."""

    kind = "memory"

    def __init__(self):
        self._buffer = bytearray()

    def write(self, data: bytes) -> None:
        self._buffer.extend(data)

    def close(self) -> None:
        pass

    def getvalue(self) -> bytes:
        return bytes(self._buffer)


class FileSink:
    """Writes one trace per file; the target is truncated at open."""

    kind = "file"

    def __init__(self, path):
        self.path = Path(path)
        self._file = open(self.path, "wb")

    def write(self, data: bytes) -> None:
        self._file.write(data)
        self._file.flush()

    def close(self) -> None:
        self._file.close()


class SocketSink:
    """Streams the same newline-delimited bytes over TCP."""

    kind = "socket"

    def __init__(self, host: str, port: int, timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)

    def write(self, data: bytes) -> None:
        self._sock.sendall(data)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def parse_sink_spec(spec: str):
    """Build a sink from 'memory', 'file:<path>' or 'tcp:<host>:<port>'."""
    if spec == "memory":
        return MemorySink()
    if spec.startswith("file:"):
        return FileSink(spec[len("file:"):])
    if spec.startswith("tcp:"):
        target = spec[len("tcp:"):]
        host, sep, port = target.rpartition(":")
        if not sep or not port.isdigit():
            raise ThirdEyeError(f"bad tcp sink spec {spec!r}")
        return SocketSink(host, int(port))
    raise ThirdEyeError(f"unknown sink spec {spec!r}")


# --- clocks -------------------------------------------------------------------


class ManualClock:
    """Deterministic clock for simulations and tests; step=0 produces ties."""

    def __init__(self, start: int = 1_000, step: int = 1_000):
        self._next = start
        self._step = step

    def __call__(self) -> int:
        value = self._next
        self._next += self._step
        return value


# --- the tracer ---------------------------------------------------------------


class Tracer:
    """Serialization point for one trace: seq assignment, filtering, sink I/O.

    Safe to call from multiple threads; each report observes exactly one
    tracing state and emission order equals seq order.
    """

    def __init__(
        self,
        registry: SchemaRegistry,
        sink,
        clock=None,
        state: TracingState | None = None,
        epoch: datetime | None = None,
    ):
        if TRACING_STATE_CHANGED not in registry:
            registry.register(TRACING_STATE_CHANGED_TYPE)
        self.registry = registry
        self.sink = sink
        self.stats = ReporterStats()
        self._clock = clock if clock is not None else time.monotonic_ns
        self._lock = threading.Lock()
        self._seq = 0
        self._state = TracingState("off")
        epoch = epoch if epoch is not None else datetime.now(timezone.utc)
        self.epoch_iso = epoch.isoformat()
        sink.write(format_header(self.epoch_iso))
        if state is not None:
            self.set_state(state)

    @property
    def state(self) -> TracingState:
        return self._state

    def set_state(self, state: TracingState) -> None:
        """Swap the emission filter; the change is recorded in the trace."""
        for name in state.enabled_types:
            if name not in self.registry:
                raise UnknownEventTypeInState(
                    f"tracing state {state.name!r} enables unregistered type {name!r}"
                )
        with self._lock:
            self._state = state
            self._emit_locked(
                TRACING_STATE_CHANGED,
                {
                    "state": state.name,
                    "enabled": ",".join(sorted(state.enabled_types)),
                },
                TRACER_SOURCE_LOCATION,
            )

    def report(self, type_name: str, explicit_props: dict, source_location: str) -> ReportResult:
        """Emit one event if its type is enabled, else count it filtered.

        Filtered reports are never constructed, so property errors surface
        only for enabled types.
        """
        with self._lock:
            ancestry = self.registry.ancestry(type_name)
            enabled = type_name == TRACING_STATE_CHANGED or any(
                name in self._state.enabled_types for name in ancestry
            )
            if not enabled:
                self.stats.filtered += 1
                self.stats.filtered_by_type[type_name] += 1
                return ReportResult.FILTERED
            self._emit_locked(type_name, explicit_props, source_location)
            self.stats.emitted += 1
            self.stats.emitted_by_type[type_name] += 1
            return ReportResult.EMITTED

    def _emit_locked(self, type_name: str, explicit_props: dict, source_location: str) -> None:
        event = self.registry.construct(
            type_name, explicit_props, self._clock(), source_location
        )
        self._seq += 1
        event.seq = self._seq
        self.sink.write(encode_event(self.registry, event))

    def close(self) -> None:
        self.sink.close()

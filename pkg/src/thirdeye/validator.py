"""Trace replay: expected decisions versus what the server answered.

For every logged request the validator rebuilds the policy in force at that
instant from the directive events earlier in the trace, re-derives the
expected decision, and compares it with the recorded access code. Nothing
but the trace and a host map is consulted; if the events are sufficient to
reconstruct the policy, they are sufficient to judge the server.

"Earlier" is strict (timestamp, seq) order, so two records with equal
timestamps are disambiguated by sequence number.
"""

from dataclasses import dataclass

from . import access_events
from .errors import BadHostPattern, MalformedDirectiveEvent
from .hosts import HostMap
from .policy import (
    DEFAULT_ORDERING,
    Decision,
    Directive,
    DirectiveKind,
    HostPattern,
    Ordering,
    PolicySnapshot,
    RequestHost,
    Stamp,
    decide,
)
from .store import Trace


@dataclass(frozen=True)
class ActualDecision:
    """The server's own answer, read off an Access_request event."""

    request_seq: int
    location: str
    host: RequestHost
    uri: str
    access_code: int

    @property
    def allowed(self) -> bool:
        return self.access_code == access_events.GRANTED_CODE


@dataclass(frozen=True)
class Verdict:
    """Expected vs actual for one request, with the justifying policy."""

    request_seq: int
    location: str
    host: RequestHost
    uri: str
    method: str
    access_code: int
    expected: Decision
    snapshot_stamp: Stamp

    @property
    def actual_allowed(self) -> bool:
        return self.access_code == access_events.GRANTED_CODE

    @property
    def agrees(self) -> bool:
        return self.expected.allowed == self.actual_allowed


@dataclass(frozen=True)
class Violation:
    """A request whose logged decision contradicts the reconstructed policy."""

    request_seq: int
    location: str
    host: RequestHost
    uri: str
    method: str
    access_code: int
    expected: Decision

    @property
    def actual_allowed(self) -> bool:
        return self.access_code == access_events.GRANTED_CODE


@dataclass
class ValidationResult:
    verdicts: list[Verdict]
    violations: list[Violation]

    @property
    def checked(self) -> int:
        return len(self.verdicts)

    @property
    def failed(self) -> int:
        return len(self.violations)

    @property
    def passed(self) -> int:
        return self.checked - self.failed


def _directive_from_event(event) -> Directive:
    kind_text = event.properties["directive"]
    try:
        kind = DirectiveKind(kind_text)
    except ValueError:
        raise MalformedDirectiveEvent(
            f"seq {event.seq}: directive kind {kind_text!r} is neither allow nor deny"
        ) from None
    try:
        pattern = HostPattern.parse(event.properties["host"])
    except BadHostPattern as exc:
        raise MalformedDirectiveEvent(f"seq {event.seq}: {exc}") from exc
    return Directive(
        event.properties["location"], kind, pattern, stamp=(event.timestamp, event.seq)
    )


def _ordering_from_event(event) -> Ordering:
    text = event.properties["ordering"]
    try:
        return Ordering(text)
    except ValueError:
        raise MalformedDirectiveEvent(
            f"seq {event.seq}: bad ordering value {text!r}"
        ) from None


def snapshot_at(trace: Trace, location: str, stamp: Stamp) -> PolicySnapshot:
    """The policy for `location` as of `stamp`: every directive event that
    strictly precedes it, under the latest preceding ordering (default
    deny,allow when none was seen)."""
    ordering = DEFAULT_ORDERING
    directives: list[Directive] = []
    for event in trace.events:
        if (event.timestamp, event.seq) >= stamp:
            continue
        if event.type_name == access_events.ACCESS_ALLOW:
            if event.properties["location"] == location:
                directives.append(_directive_from_event(event))
        elif event.type_name == access_events.ACCESS_ORDER:
            if event.properties["location"] == location:
                ordering = _ordering_from_event(event)
    directives.sort(key=lambda d: d.stamp)
    return PolicySnapshot(location, ordering, tuple(directives))


def _actual_from_event(event, host_map: HostMap) -> tuple[ActualDecision, str]:
    identity, method, _ = access_events.parse_request_record(event.properties["request"])
    host = host_map.resolve(identity)
    actual = ActualDecision(
        request_seq=event.seq,
        location=event.properties["location"],
        host=host,
        uri=event.properties["uri"],
        access_code=event.properties["access_code"],
    )
    return actual, method


def validate_trace(
    trace: Trace, host_map: HostMap, location: str | None = None
) -> ValidationResult:
    """Check every Access_request in the trace (optionally one location).

    A faithful server yields zero violations; each violation carries the
    full justification for the expected decision.
    """
    verdicts: list[Verdict] = []
    violations: list[Violation] = []
    for event in trace.events:
        if event.type_name != access_events.ACCESS_REQUEST:
            continue
        if location is not None and event.properties["location"] != location:
            continue
        actual, method = _actual_from_event(event, host_map)
        stamp: Stamp = (event.timestamp, event.seq)
        snapshot = snapshot_at(trace, actual.location, stamp)
        expected = decide(snapshot, actual.host)
        verdict = Verdict(
            request_seq=actual.request_seq,
            location=actual.location,
            host=actual.host,
            uri=actual.uri,
            method=method,
            access_code=actual.access_code,
            expected=expected,
            snapshot_stamp=stamp,
        )
        verdicts.append(verdict)
        if not verdict.agrees:
            violations.append(
                Violation(
                    request_seq=verdict.request_seq,
                    location=verdict.location,
                    host=verdict.host,
                    uri=verdict.uri,
                    method=verdict.method,
                    access_code=verdict.access_code,
                    expected=expected,
                )
            )
    return ValidationResult(verdicts, violations)


def explain(violation: Violation) -> str:
    """Deterministic human-readable account of one violation."""
    expected = violation.expected
    actual = "allowed" if violation.actual_allowed else "denied"
    lines = [
        f"seq {violation.request_seq}: {violation.method} {violation.uri} from {violation.host}",
        f"  location={violation.location} ordering={expected.ordering.value} rule {expected.rule}",
    ]
    if expected.matched:
        for directive in expected.matched:
            ts, seq = directive.stamp
            lines.append(f"  matched {directive} @ ts={ts} seq={seq}")
    else:
        default = "default-allow" if expected.ordering is Ordering.DENY_ALLOW else "default-deny"
        lines.append(f"  no matching directives; {default} under {expected.ordering.value}")
    lines.append(
        f"  expected {expected.label}, server answered {actual} "
        f"(access_code={violation.access_code})"
    )
    return "\n".join(lines)


def violation_tsv_line(violation: Violation) -> str:
    """One tab-separated line per violation for machine consumption."""
    expected = violation.expected
    matched = ",".join(
        f"{d.kind.value}:{d.pattern.raw}" for d in expected.matched
    )
    return "\t".join(
        (
            str(violation.request_seq),
            violation.location,
            violation.host.identity(),
            violation.uri,
            expected.label,
            "allowed" if violation.actual_allowed else "denied",
            str(violation.access_code),
            expected.ordering.value,
            expected.rule,
            matched,
        )
    )

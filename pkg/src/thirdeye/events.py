"""Event schemas and event instances.

An event type is a named schema: an ordered list of named, typed properties
plus single inheritance. The only behaviour a type carries is construction
(defaults applied, explicit values overlaid, result validated). Every type
implicitly owns a ``timestamp`` property (integer nanoseconds) and a
``source_location`` property (the emission site in the traced program);
instances carry those two as dedicated fields, not map entries.
"""

import re
from dataclasses import dataclass, field

from .errors import (
    DuplicateProperty,
    DuplicateTypeName,
    InheritanceCycle,
    MissingProperty,
    SchemaError,
    SchemaParseError,
    TypeMismatch,
    UnknownParent,
    UnknownProperty,
    UnknownType,
)

KINDS = ("string", "integer", "boolean", "timestamp")

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Names every type carries implicitly; they may not be redeclared.
IMPLICIT_PROPERTY_NAMES = ("timestamp", "source_location")


def is_identifier(name: str) -> bool:
    return bool(IDENTIFIER_RE.match(name))


def value_conforms(kind: str, value) -> bool:
    """True iff `value` is a legal runtime value for `kind`.

    bool is deliberately excluded from the integer kinds even though Python
    treats it as an int subtype.
    """
    if kind == "string":
        return isinstance(value, str)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "timestamp":
        return isinstance(value, int) and not isinstance(value, bool) and value >= 0
    raise ValueError(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class PropertySpec:
    """One named, typed property; `default=None` means required."""

    name: str
    kind: str
    default: object = None

    def __post_init__(self):
        if not is_identifier(self.name):
            raise SchemaError(f"bad property name {self.name!r}")
        if self.kind not in KINDS:
            raise TypeMismatch(f"property {self.name!r}: unknown kind {self.kind!r}")
        if self.default is not None and not value_conforms(self.kind, self.default):
            raise TypeMismatch(
                f"property {self.name!r}: default {self.default!r} does not conform to kind {self.kind}"
            )


IMPLICIT_PROPERTIES = (
    PropertySpec("timestamp", "timestamp"),
    PropertySpec("source_location", "string"),
)


@dataclass(frozen=True)
class EventType:
    """A named event schema with optional single inheritance."""

    name: str
    parent: str | None = None
    properties: tuple[PropertySpec, ...] = ()

    def __post_init__(self):
        if not is_identifier(self.name):
            raise SchemaError(f"bad event type name {self.name!r}")
        object.__setattr__(self, "properties", tuple(self.properties))
        seen = set(IMPLICIT_PROPERTY_NAMES)
        for prop in self.properties:
            if prop.name in seen:
                raise DuplicateProperty(
                    f"type {self.name!r}: duplicate property {prop.name!r}"
                )
            seen.add(prop.name)


@dataclass
class Event:
    """A concrete, timestamped occurrence of an event type.

    `seq` is 0 until a tracer assigns it; stored traces carry 1-based,
    gap-free sequence numbers. `properties` holds the declared (own plus
    inherited) properties only.
    """

    type_name: str
    seq: int
    timestamp: int
    source_location: str
    properties: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SchemaIssue:
    """One validation finding; `code` matches the schema error vocabulary."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _source_location_ok(value) -> bool:
    # Dedicated wire field: no escaping is defined for it.
    return isinstance(value, str) and not any(c in value for c in "\t\n\r")


class SchemaRegistry:
    """All known event types. Mutated during a build phase via `register`,
    then treated as immutable; reads are safe from any thread afterwards."""

    def __init__(self, types: "list[EventType] | None" = None):
        self._types: dict[str, EventType] = {}
        for etype in types or []:
            self.register(etype)

    # -- build phase ---------------------------------------------------------

    def register(self, etype: EventType) -> "SchemaRegistry":
        """Add one type. Parents must be registered first."""
        if etype.name in self._types:
            raise DuplicateTypeName(f"event type {etype.name!r} already registered")
        if etype.parent is not None:
            if etype.parent == etype.name:
                raise InheritanceCycle(f"type {etype.name!r} names itself as parent")
            if etype.parent not in self._types:
                raise UnknownParent(
                    f"type {etype.name!r}: unknown parent {etype.parent!r}"
                )
            inherited = {p.name for p in self._inherited_chain_properties(etype.parent)}
            for prop in etype.properties:
                if prop.name in inherited:
                    raise DuplicateProperty(
                        f"type {etype.name!r} redeclares inherited property {prop.name!r}"
                    )
        self._types[etype.name] = etype
        return self

    # -- lookups ---------------------------------------------------------------

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def get(self, name: str) -> EventType:
        try:
            return self._types[name]
        except KeyError:
            raise UnknownType(f"unknown event type {name!r}") from None

    def type_names(self) -> tuple[str, ...]:
        return tuple(self._types)

    def ancestry(self, name: str) -> tuple[str, ...]:
        """The type itself followed by its ancestors, nearest first."""
        chain = []
        seen = set()
        current: str | None = name
        while current is not None:
            if current in seen:
                raise InheritanceCycle(f"cycle through {current!r}")
            seen.add(current)
            chain.append(current)
            current = self.get(current).parent
        return tuple(chain)

    def _inherited_chain_properties(self, name: str) -> tuple[PropertySpec, ...]:
        """Declared properties of `name` and its ancestors, root first."""
        props: list[PropertySpec] = []
        for type_name in reversed(self.ancestry(name)):
            props.extend(self.get(type_name).properties)
        return tuple(props)

    def resolved_properties(self, name: str) -> tuple[PropertySpec, ...]:
        """Full property list: the two implicit properties, then ancestor
        declarations root-first, then the type's own."""
        return IMPLICIT_PROPERTIES + self._inherited_chain_properties(name)

    def declared_properties(self, name: str) -> tuple[PropertySpec, ...]:
        """Resolved list minus the implicit two; this is the wire order."""
        return self._inherited_chain_properties(name)

    # -- construction / validation ---------------------------------------------

    def construct(
        self,
        type_name: str,
        explicit_props: dict,
        timestamp: int,
        source_location: str,
    ) -> Event:
        """Build an event: defaults first, explicit values overlaid.

        The implicit `timestamp` / `source_location` ride in their dedicated
        arguments; supplying them through `explicit_props` is rejected.
        """
        declared = self.declared_properties(type_name)
        allowed = {p.name for p in declared}
        for key in explicit_props:
            if key in IMPLICIT_PROPERTY_NAMES:
                raise UnknownProperty(
                    f"{type_name}: implicit property {key!r} is set via its dedicated argument"
                )
            if key not in allowed:
                raise UnknownProperty(f"{type_name}: unknown property {key!r}")
        values = {}
        for prop in declared:
            if prop.name in explicit_props:
                value = explicit_props[prop.name]
            elif prop.default is not None:
                value = prop.default
            else:
                raise MissingProperty(
                    f"{type_name}: required property {prop.name!r} not supplied"
                )
            if not value_conforms(prop.kind, value):
                raise TypeMismatch(
                    f"{type_name}.{prop.name}: {value!r} is not a {prop.kind}"
                )
            values[prop.name] = value
        if not value_conforms("timestamp", timestamp):
            raise TypeMismatch(f"{type_name}: bad timestamp {timestamp!r}")
        if not _source_location_ok(source_location):
            raise TypeMismatch(
                f"{type_name}: source_location must be a tab/newline-free string"
            )
        return Event(type_name, 0, timestamp, source_location, values)

    def validate(self, event: Event) -> list[SchemaIssue]:
        """Check an event against its resolved schema; empty list means ok."""
        if event.type_name not in self._types:
            return [SchemaIssue("UnknownType", f"unknown event type {event.type_name!r}")]
        issues = []
        if not value_conforms("timestamp", event.timestamp):
            issues.append(
                SchemaIssue("TypeMismatch", f"bad timestamp {event.timestamp!r}")
            )
        if not _source_location_ok(event.source_location):
            issues.append(
                SchemaIssue("TypeMismatch", "source_location must be a tab/newline-free string")
            )
        if not isinstance(event.seq, int) or isinstance(event.seq, bool) or event.seq < 0:
            issues.append(SchemaIssue("TypeMismatch", f"bad seq {event.seq!r}"))
        declared = {p.name: p for p in self.declared_properties(event.type_name)}
        for name, prop in declared.items():
            if name not in event.properties:
                if prop.default is None:
                    issues.append(
                        SchemaIssue("MissingProperty", f"missing property {name!r}")
                    )
            elif not value_conforms(prop.kind, event.properties[name]):
                issues.append(
                    SchemaIssue(
                        "TypeMismatch",
                        f"{name}={event.properties[name]!r} is not a {prop.kind}",
                    )
                )
        for name in event.properties:
            if name not in declared:
                issues.append(
                    SchemaIssue("UnknownProperty", f"unknown property {name!r}")
                )
        return issues


# --- schema definition files --------------------------------------------------
#
# One declaration per line:
#
#     type <Name> [: <Parent>] { <prop>:<kind>[=<default>] , ... }
#
# Blank lines and lines starting with '#' are ignored. Parents must be
# declared on an earlier line. String defaults may be double-quoted (no
# escapes inside); bare defaults end at ',' or '}'.

_TYPE_LINE_RE = re.compile(
    r"type\s+(?P<name>\S+)\s*(?::\s*(?P<parent>\S+)\s*)?\{(?P<body>.*)\}\s*\Z"
)


def _split_top_level(body: str, line_no: int) -> list[str]:
    """Split a declaration body on commas outside double quotes."""
    parts = []
    current = []
    in_quotes = False
    for ch in body:
        if ch == '"':
            in_quotes = not in_quotes
            current.append(ch)
        elif ch == "," and not in_quotes:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if in_quotes:
        raise SchemaParseError(line_no, "unterminated string default")
    parts.append("".join(current))
    return [p.strip() for p in parts if p.strip()]


def _parse_default(kind: str, text: str, line_no: int):
    text = text.strip()
    if kind in ("integer", "timestamp"):
        if not re.fullmatch(r"-?[0-9]+", text):
            raise SchemaParseError(line_no, f"bad {kind} default {text!r}")
        return int(text)
    if kind == "boolean":
        if text not in ("true", "false"):
            raise SchemaParseError(line_no, f"bad boolean default {text!r}")
        return text == "true"
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if '"' in text or " " in text:
        raise SchemaParseError(line_no, f"bad string default {text!r}")
    return text


def _parse_property(token: str, line_no: int) -> PropertySpec:
    head, _, default_text = token.partition("=")
    name, sep, kind = head.partition(":")
    name, kind = name.strip(), kind.strip()
    if not sep or not is_identifier(name):
        raise SchemaParseError(line_no, f"bad property declaration {token!r}")
    if kind not in KINDS:
        raise SchemaParseError(line_no, f"unknown kind {kind!r}")
    default = _parse_default(kind, default_text, line_no) if default_text else None
    try:
        return PropertySpec(name, kind, default)
    except SchemaError as exc:
        raise SchemaParseError(line_no, str(exc)) from exc


def parse_schema_text(text: str, registry: SchemaRegistry | None = None) -> SchemaRegistry:
    """Parse a schema definition file into (or on top of) a registry."""
    registry = registry if registry is not None else SchemaRegistry()
    for line_no, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        match = _TYPE_LINE_RE.fullmatch(line)
        if match is None:
            raise SchemaParseError(line_no, f"unparseable declaration: {line!r}")
        name, parent = match.group("name"), match.group("parent")
        for ident in (name, parent) if parent else (name,):
            if not is_identifier(ident):
                raise SchemaParseError(line_no, f"bad type name {ident!r}")
        props = [
            _parse_property(token, line_no)
            for token in _split_top_level(match.group("body"), line_no)
        ]
        try:
            registry.register(EventType(name, parent, tuple(props)))
        except SchemaError as exc:
            raise SchemaParseError(line_no, str(exc)) from exc
    return registry

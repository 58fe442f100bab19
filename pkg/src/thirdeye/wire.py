"""Canonical newline-delimited trace encoding.

One UTF-8 text line per event, LF-terminated:

    <seq>\\t<timestamp_ns>\\t<type_name>\\t<source_location>\\t<props>

where <props> joins ``key=value`` pairs with ';', keys in the schema's
declared order. Inside values, backslash escapes cover exactly '\\\\', '\\;',
'\\=' and '\\t' (a literal tab). Decoding is strict: anything outside this
grammar is a MalformedRecord. The same bytes flow through files and sockets.
"""

import re

from .errors import MalformedRecord, UnencodableValue
from .events import Event, SchemaRegistry, is_identifier

HEADER_PREFIX = "thirdeye-trace v1 epoch="

_ESCAPES = {"\\": "\\\\", ";": "\\;", "=": "\\=", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", ";": ";", "=": "=", "t": "\t"}

_SEQ_RE = re.compile(r"[0-9]+\Z")


def format_header(epoch_iso: str) -> bytes:
    return (HEADER_PREFIX + epoch_iso + "\n").encode("utf-8")


def parse_header(line: str) -> str:
    """Return the epoch text from a v1 header line."""
    line = line.rstrip("\n")
    if not line.startswith(HEADER_PREFIX):
        raise MalformedRecord(f"not a v1 trace header: {line!r}", line_no=1)
    epoch = line[len(HEADER_PREFIX):]
    if not epoch:
        raise MalformedRecord("empty epoch in trace header", line_no=1)
    return epoch


def escape_value(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise UnencodableValue("value contains a newline; the wire format has no escape for it")
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def unescape_value(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _UNESCAPES:
                raise MalformedRecord(f"bad escape in value {text!r}")
            out.append(_UNESCAPES[text[i + 1]])
            i += 2
        elif ch in (";", "="):
            raise MalformedRecord(f"unescaped {ch!r} in value {text!r}")
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _encode_prop(kind: str, value) -> str:
    if kind == "string":
        return escape_value(value)
    if kind == "boolean":
        return "true" if value else "false"
    return str(value)  # integer / timestamp


def _decode_prop(kind: str, text: str):
    if kind == "string":
        return unescape_value(text)
    if kind == "boolean":
        if text == "true":
            return True
        if text == "false":
            return False
        raise MalformedRecord(f"bad boolean literal {text!r}")
    if kind == "integer":
        if not re.fullmatch(r"-?[0-9]+", text):
            raise MalformedRecord(f"bad integer literal {text!r}")
        return int(text)
    if kind == "timestamp":
        if not _SEQ_RE.fullmatch(text):
            raise MalformedRecord(f"bad timestamp literal {text!r}")
        return int(text)
    raise MalformedRecord(f"unknown kind {kind!r}")


def encode_event(registry: SchemaRegistry, event: Event) -> bytes:
    """Encode a valid event to its canonical wire line (LF included)."""
    declared = registry.declared_properties(event.type_name)
    pairs = [
        f"{prop.name}={_encode_prop(prop.kind, event.properties[prop.name])}"
        for prop in declared
        if prop.name in event.properties
    ]
    if any(c in event.source_location for c in "\t\n\r"):
        raise UnencodableValue("source_location contains tab or newline")
    line = "\t".join(
        (
            str(event.seq),
            str(event.timestamp),
            event.type_name,
            event.source_location,
            ";".join(pairs),
        )
    )
    return (line + "\n").encode("utf-8")


def _split_props(props_field: str) -> list[str]:
    """Split the props field on unescaped ';'."""
    pieces = []
    current = []
    i = 0
    while i < len(props_field):
        ch = props_field[i]
        if ch == "\\" and i + 1 < len(props_field):
            current.append(ch)
            current.append(props_field[i + 1])
            i += 2
        elif ch == ";":
            pieces.append("".join(current))
            current = []
            i += 1
        else:
            current.append(ch)
            i += 1
    pieces.append("".join(current))
    return pieces


def _split_pair(piece: str) -> tuple[str, str]:
    """Split one 'key=value' piece at the first unescaped '='."""
    i = 0
    while i < len(piece):
        ch = piece[i]
        if ch == "\\":
            i += 2
        elif ch == "=":
            return piece[:i], piece[i + 1:]
        else:
            i += 1
    raise MalformedRecord(f"property without '=': {piece!r}")


def decode_record(registry: SchemaRegistry, data: "bytes | str", line_no: int | None = None) -> Event:
    """Strict inverse of encode_event for one wire line."""
    try:
        line = data.decode("utf-8") if isinstance(data, bytes) else data
    except UnicodeDecodeError as exc:
        raise MalformedRecord(f"undecodable bytes: {exc}", line_no) from exc
    if line.endswith("\n"):
        line = line[:-1]
    if "\n" in line or "\r" in line:
        raise MalformedRecord("record spans multiple lines", line_no)

    fields = line.split("\t")
    if len(fields) != 5:
        raise MalformedRecord(f"expected 5 tab-separated fields, got {len(fields)}", line_no)
    seq_text, ts_text, type_name, source_location, props_field = fields

    if not _SEQ_RE.fullmatch(seq_text):
        raise MalformedRecord(f"bad seq {seq_text!r}", line_no)
    if not _SEQ_RE.fullmatch(ts_text):
        raise MalformedRecord(f"bad timestamp {ts_text!r}", line_no)
    if type_name not in registry:
        raise MalformedRecord(f"unknown event type {type_name!r}", line_no)

    declared = {p.name: p for p in registry.declared_properties(type_name)}
    properties: dict = {}
    keys_in_order: list[str] = []
    if props_field:
        for piece in _split_props(props_field):
            key, raw_value = _split_pair(piece)
            if not is_identifier(key):
                raise MalformedRecord(f"bad property key {key!r}", line_no)
            if key in properties:
                raise MalformedRecord(f"duplicate property {key!r}", line_no)
            if key not in declared:
                raise MalformedRecord(
                    f"property {key!r} not declared for {type_name}", line_no
                )
            try:
                properties[key] = _decode_prop(declared[key].kind, raw_value)
            except MalformedRecord as exc:
                raise MalformedRecord(f"property {key!r}: {exc}", line_no) from exc
            keys_in_order.append(key)

    canonical = [p for p in declared if p in properties]
    if keys_in_order != canonical:
        raise MalformedRecord(
            f"properties out of canonical order: {keys_in_order} != {canonical}", line_no
        )

    return Event(type_name, int(seq_text), int(ts_text), source_location, properties)

"""Wire codec: exact bytes, escaping, strictness, round-trip identity."""

import random

import pytest

from thirdeye.errors import MalformedRecord, UnencodableValue
from thirdeye.events import Event, EventType, PropertySpec, SchemaRegistry
from thirdeye.wire import decode_record, encode_event, format_header, parse_header


def codec_registry() -> SchemaRegistry:
    return SchemaRegistry(
        [
            EventType(
                "Base",
                properties=(
                    PropertySpec("note", "string"),
                    PropertySpec("level", "integer", 1),
                ),
            ),
            EventType(
                "Detail",
                parent="Base",
                properties=(
                    PropertySpec("flag", "boolean"),
                    PropertySpec("when", "timestamp"),
                ),
            ),
            EventType("Plain", properties=()),
        ]
    )


class TestEncode:
    def test_exact_record_bytes(self, registry):
        event = registry.construct(
            "Access_order",
            {"location": "/private", "ordering": "allow,deny"},
            timestamp=1000,
            source_location="config",
        )
        event.seq = 1
        assert encode_event(registry, event) == (
            b"1\t1000\tAccess_order\tconfig\t"
            b"location=/private;ordering=allow,deny\n"
        )

    def test_semicolon_is_escaped(self):
        registry = codec_registry()
        event = registry.construct("Base", {"note": "a;b"}, 5, "s")
        assert b"note=a\\;b;" in encode_event(registry, event)

    def test_all_escapes(self):
        registry = codec_registry()
        event = registry.construct("Base", {"note": "\\;=\t"}, 5, "s")
        line = encode_event(registry, event)
        assert b"note=\\\\\\;\\=\\t;" in line

    def test_newline_in_value_is_unencodable(self):
        registry = codec_registry()
        event = registry.construct("Base", {"note": "a\nb"}, 5, "s")
        with pytest.raises(UnencodableValue):
            encode_event(registry, event)

    def test_no_declared_properties_gives_empty_field(self):
        registry = codec_registry()
        event = registry.construct("Plain", {}, 5, "s")
        event.seq = 3
        assert encode_event(registry, event) == b"3\t5\tPlain\ts\t\n"


class TestDecode:
    def test_inverse_of_the_exact_example(self, registry):
        line = b"1\t1000\tAccess_order\tconfig\tlocation=/private;ordering=allow,deny\n"
        event = decode_record(registry, line)
        assert event == Event(
            "Access_order",
            1,
            1000,
            "config",
            {"location": "/private", "ordering": "allow,deny"},
        )

    def test_three_fields_is_malformed(self, registry):
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"1\t1000\tAccess_order\n")

    def test_non_integer_seq_is_malformed(self, registry):
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"abc\t1000\tAccess_order\tconfig\tlocation=/p;ordering=x")

    def test_unknown_type_is_malformed(self, registry):
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"1\t1000\tGhost\tconfig\t")

    def test_bad_escape_is_malformed(self):
        registry = codec_registry()
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"1\t5\tBase\ts\tnote=a\\xb")

    def test_unknown_property_is_malformed(self):
        registry = codec_registry()
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"1\t5\tBase\ts\tcolor=red")

    def test_duplicate_property_is_malformed(self):
        registry = codec_registry()
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"1\t5\tBase\ts\tnote=a;note=b")

    def test_non_canonical_order_is_malformed(self):
        registry = codec_registry()
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"1\t5\tBase\ts\tlevel=2;note=a")

    def test_bad_integer_literal_is_malformed(self):
        registry = codec_registry()
        with pytest.raises(MalformedRecord):
            decode_record(registry, b"1\t5\tBase\ts\tnote=a;level=two")

    def test_missing_defaulted_property_still_decodes(self):
        registry = codec_registry()
        event = decode_record(registry, b"1\t5\tBase\ts\tnote=a")
        assert event.properties == {"note": "a"}
        assert registry.validate(event) == []


ADVERSARIAL_ALPHABET = "ab;=\\\t日\u00e9 *?._-01"


def random_string(rng: random.Random) -> str:
    return "".join(
        rng.choice(ADVERSARIAL_ALPHABET) for _ in range(rng.randrange(0, 12))
    )


def random_event(registry: SchemaRegistry, rng: random.Random) -> Event:
    type_name = rng.choice(("Base", "Detail", "Plain"))
    props = {}
    for spec in registry.declared_properties(type_name):
        if spec.default is not None and rng.random() < 0.3:
            continue  # defaulted properties may be absent on the wire
        if spec.kind == "string":
            props[spec.name] = random_string(rng)
        elif spec.kind == "integer":
            props[spec.name] = rng.randrange(-10**9, 10**9)
        elif spec.kind == "boolean":
            props[spec.name] = rng.random() < 0.5
        else:
            props[spec.name] = rng.randrange(0, 10**15)
    event = Event(type_name, rng.randrange(0, 10**9), rng.randrange(0, 10**15), "src.c:42", props)
    return event


class TestRoundTrip:
    def test_identity_over_randomized_events(self):
        registry = codec_registry()
        rng = random.Random(1234)
        for _ in range(1000):
            event = random_event(registry, rng)
            assert decode_record(registry, encode_event(registry, event)) == event


class TestHeader:
    def test_header_round_trip(self):
        line = format_header("2001-07-01T00:00:00+00:00")
        assert line == b"thirdeye-trace v1 epoch=2001-07-01T00:00:00+00:00\n"
        assert parse_header(line.decode()) == "2001-07-01T00:00:00+00:00"

    def test_bad_header_is_malformed(self):
        with pytest.raises(MalformedRecord):
            parse_header("something else")

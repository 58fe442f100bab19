"""The access-control event family.

Three event types cover a server's access policy end to end:

* ``Access_order``   - an ordering directive was read for a location.
* ``Access_allow``   - an allow or deny directive was read for a location.
* ``Access_request`` - a client requested a location; the access code is
  zero when access was granted and non-zero when it was denied.

The request record property packs the client identity in front of the
request line (``<host> <METHOD> <uri>``) so a trace alone, plus a host map,
suffices to re-derive every decision.
"""

from .errors import MalformedRequestEvent
from .events import EventType, PropertySpec, SchemaRegistry
from .policy import RequestHost
from .runtime import TRACING_STATE_CHANGED_TYPE

ACCESS_ORDER = "Access_order"
ACCESS_ALLOW = "Access_allow"
ACCESS_REQUEST = "Access_request"

ACCESS_TYPE_NAMES = (ACCESS_ORDER, ACCESS_ALLOW, ACCESS_REQUEST)

GRANTED_CODE = 0
DENIED_CODE = 403

# emission sites used by the simulated server
CONFIG_SOURCE = "config"
REQUEST_SOURCE = "request"


def access_event_types() -> tuple[EventType, ...]:
    return (
        EventType(
            ACCESS_ORDER,
            properties=(
                PropertySpec("location", "string"),
                PropertySpec("ordering", "string"),
            ),
        ),
        EventType(
            ACCESS_ALLOW,
            properties=(
                PropertySpec("location", "string"),
                PropertySpec("host", "string"),
                PropertySpec("directive", "string"),
            ),
        ),
        EventType(
            ACCESS_REQUEST,
            properties=(
                PropertySpec("location", "string"),
                PropertySpec("request", "string"),
                PropertySpec("access_code", "integer"),
                PropertySpec("uri", "string"),
            ),
        ),
    )


def build_registry() -> SchemaRegistry:
    """Registry with the access family plus the tracer's built-in type."""
    registry = SchemaRegistry(list(access_event_types()))
    registry.register(TRACING_STATE_CHANGED_TYPE)
    return registry


def format_request_record(host: RequestHost, uri: str, method: str = "GET") -> str:
    return f"{host.identity()} {method} {uri}"


def parse_request_record(record: str) -> tuple[str, str, str]:
    """Split a request record into (host identity, method, uri)."""
    parts = record.split(" ")
    if len(parts) != 3 or not all(parts):
        raise MalformedRequestEvent(
            f"request record must be '<host> <METHOD> <uri>', got {record!r}"
        )
    return parts[0], parts[1], parts[2]

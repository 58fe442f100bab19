"""Exception hierarchy shared by every thirdeye module.

Everything raised on purpose derives from ThirdEyeError so callers (CLI,
service) can map domain failures to exit code 2 / HTTP 422 in one place.
"""


class ThirdEyeError(Exception):
    """Base class for all errors raised by this package."""


# --- event schemas ---------------------------------------------------------

class SchemaError(ThirdEyeError):
    """A schema definition or an event instance breaks the schema rules."""


class DuplicateTypeName(SchemaError):
    pass


class UnknownParent(SchemaError):
    pass


class DuplicateProperty(SchemaError):
    pass


class InheritanceCycle(SchemaError):
    pass


class UnknownType(SchemaError):
    pass


class MissingProperty(SchemaError):
    pass


class TypeMismatch(SchemaError):
    pass


class UnknownProperty(SchemaError):
    pass


class SchemaParseError(ThirdEyeError):
    """Bad line in a schema definition file."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# --- tracing runtime / wire format -----------------------------------------

class UnknownEventTypeInState(ThirdEyeError):
    pass


class UnencodableValue(ThirdEyeError):
    """A value contains characters the wire format cannot carry (CR/LF,
    or a tab outside an escapable position)."""


class MalformedRecord(ThirdEyeError):
    """A wire record deviates from the trace grammar."""

    def __init__(self, message: str, line_no: int | None = None):
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)
        self.line_no = line_no


# --- trace store ------------------------------------------------------------

class TraceError(ThirdEyeError):
    pass


class SeqGap(TraceError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no


class TimestampRegression(TraceError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no


class SchemaViolation(TraceError):
    """A decoded record does not validate against its event type."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no


class QueryError(ThirdEyeError):
    pass


class UnknownPropertyInPredicate(QueryError):
    pass


class QueryKindMismatch(QueryError):
    """Predicate literal or operator does not fit the property's kind."""


class BadQueryOperator(QueryError):
    pass


# --- access policy ----------------------------------------------------------

class BadHostPattern(ThirdEyeError):
    pass


class ConfigParseError(ThirdEyeError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# --- validator / harness -----------------------------------------------------

class UnresolvableHost(ThirdEyeError):
    pass


class MalformedRequestEvent(ThirdEyeError):
    pass


class MalformedDirectiveEvent(ThirdEyeError):
    pass


class UnknownMutation(ThirdEyeError):
    pass

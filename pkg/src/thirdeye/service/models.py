"""Request/response models for the HTTP service."""

from pydantic import BaseModel, Field


class EventOut(BaseModel):
    seq: int
    timestamp: int
    type: str
    source_location: str
    properties: dict


class DirectiveOut(BaseModel):
    kind: str
    pattern: str
    timestamp: int
    seq: int


class DecisionOut(BaseModel):
    allowed: bool
    rule: str
    ordering: str
    matched: list[DirectiveOut]


class ViolationOut(BaseModel):
    request_seq: int
    location: str
    host: str
    ip: str
    uri: str
    method: str
    access_code: int
    expected: DecisionOut
    actual_allowed: bool
    explanation: str


class SimulateRequest(BaseModel):
    config_text: str
    seed: int = 1
    count: int = Field(default=50, ge=1)
    mutation: str | None = None
    state: str = "access"
    host_map_text: str | None = None


class SimulateResponse(BaseModel):
    trace: str
    host_map: str
    access_codes: list[int]
    emitted: int
    filtered: int


class ValidateRequest(BaseModel):
    trace: str
    host_map_text: str
    location: str | None = None


class ValidateResponse(BaseModel):
    checked: int
    passed: int
    failed: int
    violations: list[ViolationOut]


class QueryRequest(BaseModel):
    trace: str
    types: list[str] | None = None
    where: list[str] = Field(default_factory=list)
    from_ns: int | None = None
    to_ns: int | None = None


class QueryResponse(BaseModel):
    count: int
    events: list[EventOut]


class ReportRequest(BaseModel):
    trace: str


class ReportResponse(BaseModel):
    total_events: int
    per_type: dict[str, int]
    requests_by_location: dict[str, int]
    granted: int
    denied: int
    first_timestamp: int | None
    last_timestamp: int | None
    text: str
    kv_lines: list[str]


class SchemaCheckRequest(BaseModel):
    schema_text: str


class TypeOut(BaseModel):
    name: str
    parent: str | None
    resolved_properties: list[str]


class SchemaCheckResponse(BaseModel):
    ok: bool
    types: list[TypeOut]
    errors: list[str]


class MutantOutcomeOut(BaseModel):
    mutation: str
    description: str
    violations: int
    detected: bool


class MutantsRequest(BaseModel):
    config_text: str
    seed: int = 1
    count: int = Field(default=50, ge=1)


class MutantsResponse(BaseModel):
    outcomes: list[MutantOutcomeOut]
    all_detected: bool


class HealthResponse(BaseModel):
    status: str
    version: str

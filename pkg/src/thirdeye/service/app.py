"""HTTP facade over the core package.

Every endpoint is a stateless wrapper: traces, configs and host maps travel
in request bodies, so one long-running service can serve any number of
clients without local file access. Domain errors map to 422 with the
error class name in the payload.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, access_events
from ..errors import ThirdEyeError
from ..events import Event, SchemaRegistry, parse_schema_text
from ..harness import MUTATIONS, default_host_map, get_mutation, run_mutants, run_simulation
from ..hosts import HostMap
from ..policy import Decision
from ..store import (
    Query,
    load_trace,
    parse_predicate,
    render_report,
    report_kv_lines,
    run_query,
    summarize,
)
from ..validator import Violation, explain, validate_trace
from . import models


def _decision_out(decision: Decision) -> models.DecisionOut:
    return models.DecisionOut(
        allowed=decision.allowed,
        rule=decision.rule,
        ordering=decision.ordering.value,
        matched=[
            models.DirectiveOut(
                kind=d.kind.value,
                pattern=d.pattern.raw,
                timestamp=d.stamp[0],
                seq=d.stamp[1],
            )
            for d in decision.matched
        ],
    )


def _violation_out(violation: Violation) -> models.ViolationOut:
    return models.ViolationOut(
        request_seq=violation.request_seq,
        location=violation.location,
        host=violation.host.identity(),
        ip=violation.host.ip,
        uri=violation.uri,
        method=violation.method,
        access_code=violation.access_code,
        expected=_decision_out(violation.expected),
        actual_allowed=violation.actual_allowed,
        explanation=explain(violation),
    )


def _event_out(event: Event) -> models.EventOut:
    return models.EventOut(
        seq=event.seq,
        timestamp=event.timestamp,
        type=event.type_name,
        source_location=event.source_location,
        properties=event.properties,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="thirdeye", version=__version__)

    @app.exception_handler(ThirdEyeError)
    async def _domain_error(request: Request, exc: ThirdEyeError):
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health", response_model=models.HealthResponse)
    def health():
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=models.SimulateResponse)
    def simulate(body: models.SimulateRequest):
        host_map = (
            HostMap.parse(body.host_map_text)
            if body.host_map_text is not None
            else default_host_map()
        )
        if body.mutation is not None:
            get_mutation(body.mutation)  # fail fast on unknown names
        run = run_simulation(
            body.config_text,
            seed=body.seed,
            n=body.count,
            mutation=body.mutation,
            state=body.state,
            host_map=host_map,
        )
        return models.SimulateResponse(
            trace=run.raw_trace.decode("utf-8"),
            host_map=host_map.format(),
            access_codes=list(run.codes),
            emitted=run.stats["emitted"],
            filtered=run.stats["filtered"],
        )

    @app.post("/validate", response_model=models.ValidateResponse)
    def validate(body: models.ValidateRequest):
        registry = access_events.build_registry()
        trace = load_trace(body.trace.encode("utf-8"), registry)
        host_map = HostMap.parse(body.host_map_text)
        result = validate_trace(trace, host_map, location=body.location)
        return models.ValidateResponse(
            checked=result.checked,
            passed=result.passed,
            failed=result.failed,
            violations=[_violation_out(v) for v in result.violations],
        )

    @app.post("/query", response_model=models.QueryResponse)
    def query(body: models.QueryRequest):
        registry = access_events.build_registry()
        trace = load_trace(body.trace.encode("utf-8"), registry)
        time_range = None
        if body.from_ns is not None or body.to_ns is not None:
            time_range = (
                body.from_ns if body.from_ns is not None else 0,
                body.to_ns if body.to_ns is not None else 2**63,
            )
        q = Query(
            type_filter=frozenset(body.types) if body.types else None,
            predicates=tuple(parse_predicate(w, registry) for w in body.where),
            time_range=time_range,
        )
        events = run_query(trace, q)
        return models.QueryResponse(count=len(events), events=[_event_out(e) for e in events])

    @app.post("/report", response_model=models.ReportResponse)
    def report(body: models.ReportRequest):
        registry = access_events.build_registry()
        trace = load_trace(body.trace.encode("utf-8"), registry)
        rep = summarize(trace)
        return models.ReportResponse(
            total_events=rep.total_events,
            per_type=rep.per_type,
            requests_by_location=rep.requests_by_location,
            granted=rep.granted,
            denied=rep.denied,
            first_timestamp=rep.first_timestamp,
            last_timestamp=rep.last_timestamp,
            text=render_report(rep),
            kv_lines=report_kv_lines(rep),
        )

    @app.post("/schema/check", response_model=models.SchemaCheckResponse)
    def schema_check(body: models.SchemaCheckRequest):
        registry = SchemaRegistry()
        try:
            parse_schema_text(body.schema_text, registry)
        except ThirdEyeError as exc:
            return models.SchemaCheckResponse(ok=False, types=[], errors=[str(exc)])
        types = [
            models.TypeOut(
                name=name,
                parent=registry.get(name).parent,
                resolved_properties=[
                    f"{p.name}:{p.kind}" for p in registry.resolved_properties(name)
                ],
            )
            for name in registry.type_names()
        ]
        return models.SchemaCheckResponse(ok=True, types=types, errors=[])

    @app.post("/mutants", response_model=models.MutantsResponse)
    def mutants(body: models.MutantsRequest):
        outcomes = run_mutants(body.config_text, seed=body.seed, n=body.count)
        outs = [
            models.MutantOutcomeOut(
                mutation=o.mutation_id,
                description=MUTATIONS[o.mutation_id].description,
                violations=o.violations,
                detected=o.detected,
            )
            for o in outcomes
        ]
        return models.MutantsResponse(
            outcomes=outs, all_detected=all(o.detected for o in outcomes)
        )

    return app

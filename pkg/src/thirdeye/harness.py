"""Simulated instrumented web server.

Reads a configuration, emits one directive event per directive read, then
serves a synthetic workload, answering each request with access code 0 or
403 and emitting one request event per answer. The decision logic can be
replaced by one of six named mutations, each a pure transform of the
decide function, to demonstrate that trace validation catches the fault.

Workloads are generated deterministically from a seed and are coverage
biased: for every directive pattern the workload contains a matching and a
non-matching host when the request budget permits, plus a host matching an
allow/deny pair together and a host matching nothing, so every branch of
the decision rules gets exercised.
"""

import random
from collections.abc import Callable
from dataclasses import dataclass, replace

from . import access_events
from .errors import UnknownMutation
from .hosts import HostMap
from .policy import (
    ConfigDirective,
    ConfigOrder,
    Decision,
    DirectiveKind,
    Ordering,
    PolicySnapshot,
    RequestHost,
    decide,
    match_host,
    parse_config,
    snapshot_from_config,
)
from .events import SchemaRegistry
from .runtime import ManualClock, MemorySink, Tracer, TracingState
from .store import Trace, load_trace
from .validator import ValidationResult, validate_trace

# --- the standard host universe -------------------------------------------------
#
# Twelve names over eight addresses; badguys.com and intranet.corp alias
# addresses that also show up bare in directives, which is what makes a
# name-level deny reach an address-level allow.

DEFAULT_HOST_TABLE = {
    "goodguys.org": "203.0.113.10",
    "www.goodguys.org": "203.0.113.11",
    "badguys.com": "123.156.3.5",
    "www.badguys.com": "123.156.3.6",
    "partner.net": "198.51.100.20",
    "www.partner.net": "198.51.100.21",
    "intranet.corp": "10.0.0.42",
    "mail.intranet.corp": "10.0.0.43",
    "neutral.io": "192.0.2.77",
    "visitor.example": "192.0.2.78",
    "spider.bot": "192.0.2.79",
    "localhost": "127.0.0.1",
}

# Eight bare-address identities; the last two alias table names, so a
# request written as the address still presents as the named host.
UNIVERSE_IPS = (
    "9.9.9.9",
    "8.8.4.4",
    "172.16.0.9",
    "192.168.1.50",
    "198.51.100.99",
    "203.0.113.99",
    "123.156.3.5",
    "10.0.0.42",
)


def default_host_map() -> HostMap:
    return HostMap(dict(DEFAULT_HOST_TABLE))


def universe_hosts(host_map: HostMap) -> list[RequestHost]:
    """Every distinct client the workload generator may draw."""
    hosts: list[RequestHost] = []
    seen = set()
    identities = [name for name, _ in host_map.items()]
    identities += list(UNIVERSE_IPS)
    for identity in identities:
        host = host_map.resolve(identity)
        key = (host.hostname, host.ip)
        if key not in seen:
            seen.add(key)
            hosts.append(host)
    return hosts


# --- workloads -------------------------------------------------------------------


@dataclass(frozen=True)
class WorkloadRequest:
    location: str
    host: RequestHost
    uri: str


@dataclass(frozen=True)
class Workload:
    rng_seed: int
    requests: tuple[WorkloadRequest, ...]


_PAGES = ("index.html", "x.html", "data/report.txt", "img/logo.png")

FALLBACK_LOCATION = "/unlisted"


def _make_request(location: str, host: RequestHost, rng: random.Random) -> WorkloadRequest:
    page = rng.choice(_PAGES)
    return WorkloadRequest(location, host, f"{location.rstrip('/')}/{page}")


def generate_workload(
    rng_seed: int, config_text: str, n: int, host_map: HostMap | None = None
) -> Workload:
    """Deterministic, coverage-biased workload of `n` requests."""
    if n < 1:
        raise ValueError("workload needs at least one request")
    host_map = host_map if host_map is not None else default_host_map()
    rng = random.Random(rng_seed)
    config = parse_config(config_text)
    universe = universe_hosts(host_map)

    targets: list[tuple[str, RequestHost]] = []
    for location, items in config.items():
        directives = [item for item in items if isinstance(item, ConfigDirective)]
        matching_pools = {}
        for item in directives:
            matching_pools[item] = [h for h in universe if match_host(item.pattern, h)]
            if matching_pools[item]:
                targets.append((location, rng.choice(matching_pools[item])))
        unmatched = [
            h
            for h in universe
            if not any(match_host(item.pattern, h) for item in directives)
        ]
        if unmatched:
            targets.append((location, rng.choice(unmatched)))
        for item in directives:
            pool = [h for h in universe if h not in matching_pools[item]]
            if pool:
                targets.append((location, rng.choice(pool)))
        # hosts hit by an allow and a deny together exercise the A-and-D branch
        allows = [d for d in directives if d.kind is DirectiveKind.ALLOW]
        denies = [d for d in directives if d.kind is DirectiveKind.DENY]
        for allow in allows:
            for deny in denies:
                both = [
                    h
                    for h in matching_pools[allow]
                    if match_host(deny.pattern, h)
                ]
                if both:
                    targets.append((location, rng.choice(both)))

    requests = [_make_request(loc, host, rng) for loc, host in targets[:n]]
    fill_locations = list(config) + [FALLBACK_LOCATION]
    while len(requests) < n:
        requests.append(
            _make_request(rng.choice(fill_locations), rng.choice(universe), rng)
        )
    return Workload(rng_seed, tuple(requests))


# --- mutations --------------------------------------------------------------------


def _flip(decision: Decision) -> Decision:
    return replace(
        decision,
        allowed=not decision.allowed,
        rule="B" if decision.rule == "A" else "A",
    )


def _swap_ordering(snapshot: PolicySnapshot, host: RequestHost) -> Decision:
    other = (
        Ordering.ALLOW_DENY
        if snapshot.ordering is Ordering.DENY_ALLOW
        else Ordering.DENY_ALLOW
    )
    return decide(replace(snapshot, ordering=other), host)


def _ignore_deny(snapshot: PolicySnapshot, host: RequestHost) -> Decision:
    kept = tuple(d for d in snapshot.directives if d.kind is not DirectiveKind.DENY)
    return decide(replace(snapshot, directives=kept), host)


def _ignore_allow(snapshot: PolicySnapshot, host: RequestHost) -> Decision:
    kept = tuple(d for d in snapshot.directives if d.kind is not DirectiveKind.ALLOW)
    return decide(replace(snapshot, directives=kept), host)


def _invert_decision(snapshot: PolicySnapshot, host: RequestHost) -> Decision:
    return _flip(decide(snapshot, host))


def _match_ip_only(snapshot: PolicySnapshot, host: RequestHost) -> Decision:
    return decide(snapshot, replace(host, hostname=None))


def _default_flip(snapshot: PolicySnapshot, host: RequestHost) -> Decision:
    decision = decide(snapshot, host)
    if decision.matched:
        return decision
    return _flip(decision)


@dataclass(frozen=True)
class Mutation:
    """One named fault in the simulated server's decision logic."""

    id: str
    description: str
    transform: Callable[[PolicySnapshot, RequestHost], Decision]

    def apply(self, snapshot: PolicySnapshot, host: RequestHost) -> Decision:
        return self.transform(snapshot, host)


MUTATIONS: dict[str, Mutation] = {
    m.id: m
    for m in (
        Mutation("SWAP_ORDERING", "processes the two orderings as each other", _swap_ordering),
        Mutation("IGNORE_DENY", "never matches deny directives", _ignore_deny),
        Mutation("IGNORE_ALLOW", "never matches allow directives", _ignore_allow),
        Mutation("INVERT_DECISION", "answers the opposite of every decision", _invert_decision),
        Mutation("MATCH_IP_ONLY", "matches directives against the address only", _match_ip_only),
        Mutation("DEFAULT_FLIP", "flips the default answer for unmatched hosts", _default_flip),
    )
}


def get_mutation(name: str) -> Mutation:
    try:
        return MUTATIONS[name]
    except KeyError:
        raise UnknownMutation(
            f"unknown mutation {name!r}; known: {', '.join(MUTATIONS)}"
        ) from None


# --- the simulated server -----------------------------------------------------------


@dataclass
class SimulationResult:
    codes: tuple[int, ...]
    decisions: tuple[Decision, ...]


def simulate(
    config_text: str,
    workload: Workload,
    mutation: "Mutation | None",
    tracer: Tracer,
) -> SimulationResult:
    """Run the server once: read config (emitting directive events), then
    answer the workload (emitting one request event per answer)."""
    config = parse_config(config_text)
    policies = {
        location: snapshot_from_config(location, items)
        for location, items in config.items()
    }
    for location, items in config.items():
        for item in items:
            if isinstance(item, ConfigOrder):
                tracer.report(
                    access_events.ACCESS_ORDER,
                    {"location": location, "ordering": item.ordering.value},
                    access_events.CONFIG_SOURCE,
                )
            else:
                tracer.report(
                    access_events.ACCESS_ALLOW,
                    {
                        "location": location,
                        "host": item.pattern.raw,
                        "directive": item.kind.value,
                    },
                    access_events.CONFIG_SOURCE,
                )
    codes = []
    decisions = []
    for request in workload.requests:
        snapshot = policies.get(request.location, PolicySnapshot(request.location))
        if mutation is not None:
            decision = mutation.apply(snapshot, request.host)
        else:
            decision = decide(snapshot, request.host)
        code = access_events.GRANTED_CODE if decision.allowed else access_events.DENIED_CODE
        tracer.report(
            access_events.ACCESS_REQUEST,
            {
                "location": request.location,
                "request": access_events.format_request_record(request.host, request.uri),
                "access_code": code,
                "uri": request.uri,
            },
            access_events.REQUEST_SOURCE,
        )
        codes.append(code)
        decisions.append(decision)
    return SimulationResult(tuple(codes), tuple(decisions))


# --- one-call runs -------------------------------------------------------------------


STATE_PRESETS = ("all", "access", "none")


def resolve_state(registry, spec: str) -> TracingState:
    """Named presets or an explicit comma-separated type list."""
    if spec == "all":
        return TracingState("all", frozenset(registry.type_names()))
    if spec == "access":
        return TracingState("access", frozenset(access_events.ACCESS_TYPE_NAMES))
    if spec in ("none", "off"):
        return TracingState("none")
    return TracingState("custom", frozenset(t for t in spec.split(",") if t))


@dataclass
class SimulationRun:
    raw_trace: bytes
    codes: tuple[int, ...]
    decisions: tuple[Decision, ...]
    stats: dict
    workload: Workload
    host_map: HostMap
    registry: SchemaRegistry

    def trace(self) -> Trace:
        return load_trace(self.raw_trace, self.registry)


def run_simulation(
    config_text: str,
    workload: Workload | None = None,
    *,
    seed: int = 1,
    n: int = 50,
    mutation: "Mutation | str | None" = None,
    state: str = "access",
    host_map: HostMap | None = None,
    epoch=None,
) -> SimulationRun:
    """Simulate into a memory sink and hand back the trace bytes together
    with everything needed to validate them."""
    registry = access_events.build_registry()
    host_map = host_map if host_map is not None else default_host_map()
    if workload is None:
        workload = generate_workload(seed, config_text, n, host_map)
    if isinstance(mutation, str):
        mutation = get_mutation(mutation)
    memory = MemorySink()
    tracer = Tracer(
        registry,
        memory,
        clock=ManualClock(),
        state=resolve_state(registry, state),
        epoch=epoch,
    )
    result = simulate(config_text, workload, mutation, tracer)
    return SimulationRun(
        raw_trace=memory.getvalue(),
        codes=result.codes,
        decisions=result.decisions,
        stats=tracer.stats.as_dict(),
        workload=workload,
        host_map=host_map,
        registry=registry,
    )


@dataclass(frozen=True)
class MutantOutcome:
    mutation_id: str
    violations: int
    detected: bool


def run_mutants(
    config_text: str, seed: int = 1, n: int = 50, host_map: HostMap | None = None
) -> list[MutantOutcome]:
    """Run every mutation over the same workload and validate each trace."""
    host_map = host_map if host_map is not None else default_host_map()
    workload = generate_workload(seed, config_text, n, host_map)
    outcomes = []
    for mutation in MUTATIONS.values():
        run = run_simulation(
            config_text, workload, mutation=mutation, host_map=host_map
        )
        result = validate_trace(run.trace(), host_map)
        outcomes.append(
            MutantOutcome(mutation.id, result.failed, result.failed > 0)
        )
    return outcomes


def validate_run(run: SimulationRun) -> ValidationResult:
    return validate_trace(run.trace(), run.host_map)


# --- random configurations for property runs ------------------------------------------

_LOCATION_POOL = ("/private", "/docs", "/admin", "/pub")

_PATTERN_POOL = (
    "goodguys.org",
    "badguys.com",
    "partner.net",
    "intranet.corp",
    "www.badguys.com",
    "corp",
    "example",
    "127.0.0.1",
    "123.156.3.5",
    "123.156",
    "10.0",
    "192.0.2.77",
    "198.51.100",
    "172.16",
    "*.org",
    "www.*",
    "*guys*",
    "10.0.0.?",
    "*.net",
    "all",
)


def random_config(rng: random.Random) -> str:
    """A small random but always-parseable configuration."""
    lines = []
    for location in rng.sample(_LOCATION_POOL, rng.randint(1, 3)):
        lines.append(f"<Location {location}>")
        if rng.random() < 0.75:
            lines.append(f"Order {rng.choice([o.value for o in Ordering])}")
        for _ in range(rng.randint(0, 5)):
            kind = rng.choice(("Allow", "Deny"))
            patterns = " ".join(
                rng.choice(_PATTERN_POOL) for _ in range(rng.randint(1, 2))
            )
            lines.append(f"{kind} from {patterns}")
        lines.append("</Location>")
    return "\n".join(lines) + "\n"

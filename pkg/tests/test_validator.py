"""Trace replay validation: snapshots, verdicts, explanations."""

import random

import pytest

from conftest import EXAMPLE_CONFIG
from thirdeye.access_events import ACCESS_ALLOW, ACCESS_ORDER, ACCESS_REQUEST, build_registry
from thirdeye.errors import (
    MalformedDirectiveEvent,
    MalformedRequestEvent,
    UnresolvableHost,
)
from thirdeye.harness import random_config, run_simulation
from thirdeye.hosts import HostMap
from thirdeye.policy import DEFAULT_ORDERING, DirectiveKind, Ordering
from thirdeye.store import load_trace
from thirdeye.validator import explain, snapshot_at, validate_trace

HEADER = "thirdeye-trace v1 epoch=2001-07-01T00:00:00+00:00\n"


def trace_of(*records: str):
    return load_trace((HEADER + "".join(r + "\n" for r in records)).encode(), build_registry())


def order_rec(seq, ts, location, ordering):
    return f"{seq}\t{ts}\tAccess_order\tconfig\tlocation={location};ordering={ordering}"


def allow_rec(seq, ts, location, host, directive="allow"):
    return f"{seq}\t{ts}\tAccess_allow\tconfig\tlocation={location};host={host};directive={directive}"


def request_rec(seq, ts, location, identity, code, uri="/p/x.html"):
    return (
        f"{seq}\t{ts}\tAccess_request\trequest\t"
        f"location={location};request={identity} GET {uri};access_code={code};uri={uri}"
    )


class TestSnapshotAt:
    def test_example_config_lifted_into_events(self):
        trace = trace_of(
            order_rec(1, 10, "/p", "allow,deny"),
            allow_rec(2, 20, "/p", "goodguys.org"),
            allow_rec(3, 30, "/p", "badguys.com", "deny"),
            allow_rec(4, 40, "/p", "127.0.0.1"),
            allow_rec(5, 50, "/p", "123.156.3.5"),
            request_rec(6, 60, "/p", "goodguys.org", 0),
        )
        snapshot = snapshot_at(trace, "/p", (60, 6))
        assert snapshot.ordering is Ordering.ALLOW_DENY
        assert len(snapshot.directives) == 4
        assert [d.stamp for d in snapshot.directives] == [(20, 2), (30, 3), (40, 4), (50, 5)]

    def test_request_before_any_config_sees_the_default(self):
        trace = trace_of(
            request_rec(1, 5, "/p", "9.9.9.9", 0),
            order_rec(2, 10, "/p", "allow,deny"),
        )
        snapshot = snapshot_at(trace, "/p", (5, 1))
        assert snapshot.ordering is DEFAULT_ORDERING
        assert snapshot.directives == ()

    def test_latest_order_wins_and_matches_a_linear_replay(self):
        trace = trace_of(
            order_rec(1, 10, "/p", "deny,allow"),
            allow_rec(2, 20, "/p", "goodguys.org"),
            order_rec(3, 30, "/p", "allow,deny"),
            allow_rec(4, 40, "/q", "all"),
            request_rec(5, 50, "/p", "goodguys.org", 0),
        )
        stamp = (50, 5)
        snapshot = snapshot_at(trace, "/p", stamp)
        assert snapshot.ordering is Ordering.ALLOW_DENY

        # independent linear replay
        ordering = DEFAULT_ORDERING
        directives = []
        for event in trace.events:
            if (event.timestamp, event.seq) >= stamp:
                break
            if event.type_name == ACCESS_ORDER and event.properties["location"] == "/p":
                ordering = Ordering(event.properties["ordering"])
            if event.type_name == ACCESS_ALLOW and event.properties["location"] == "/p":
                directives.append(
                    (DirectiveKind(event.properties["directive"]),
                     event.properties["host"])
                )
        assert snapshot.ordering is ordering
        assert [(d.kind, d.pattern.raw) for d in snapshot.directives] == directives

    def test_timestamp_ties_break_on_seq(self):
        trace = trace_of(
            allow_rec(1, 100, "/p", "all"),
            request_rec(2, 100, "/p", "9.9.9.9", 0),
            allow_rec(3, 100, "/p", "badguys.com", "deny"),
        )
        snapshot = snapshot_at(trace, "/p", (100, 2))
        assert [d.pattern.raw for d in snapshot.directives] == ["all"]

    def test_other_locations_do_not_leak(self):
        trace = trace_of(
            allow_rec(1, 10, "/a", "all"),
            allow_rec(2, 20, "/b", "all", "deny"),
        )
        snapshot = snapshot_at(trace, "/a", (100, 10))
        assert [d.location for d in snapshot.directives] == ["/a"]


class TestValidateTrace:
    def test_faithful_simulation_has_zero_violations(self):
        run = run_simulation(EXAMPLE_CONFIG, seed=11, n=50)
        result = validate_trace(run.trace(), run.host_map)
        assert result.checked == 50
        assert result.failed == 0
        assert result.passed == 50

    def test_single_flipped_code_yields_exactly_one_violation(self):
        run = run_simulation(EXAMPLE_CONFIG, seed=11, n=50)
        trace = run.trace()
        granted = [e for e in trace.events if e.type_name == ACCESS_REQUEST
                   and e.properties["access_code"] == 0]
        victim = granted[3]
        victim.properties["access_code"] = 403
        result = validate_trace(trace, run.host_map)
        assert result.failed == 1
        assert result.violations[0].request_seq == victim.seq
        assert result.violations[0].expected.allowed is True
        assert result.violations[0].actual_allowed is False

    def test_mutated_server_is_caught(self):
        run = run_simulation(EXAMPLE_CONFIG, seed=11, n=50, mutation="IGNORE_DENY")
        result = validate_trace(run.trace(), run.host_map)
        assert result.failed >= 1

    def test_unresolvable_host(self):
        trace = trace_of(request_rec(1, 10, "/p", "mystery.example", 0))
        with pytest.raises(UnresolvableHost):
            validate_trace(trace, HostMap({}))

    def test_malformed_request_record(self):
        trace = trace_of(
            f"1\t10\tAccess_request\trequest\t"
            f"location=/p;request=nonsense;access_code=0;uri=/x"
        )
        with pytest.raises(MalformedRequestEvent):
            validate_trace(trace, HostMap({}))

    def test_malformed_directive_event(self):
        trace = trace_of(
            allow_rec(1, 10, "/p", "all", directive="maybe"),
            request_rec(2, 20, "/p", "9.9.9.9", 0),
        )
        with pytest.raises(MalformedDirectiveEvent):
            validate_trace(trace, HostMap({}))

    def test_location_filter(self):
        trace = trace_of(
            request_rec(1, 10, "/a", "9.9.9.9", 0, uri="/a/x"),
            request_rec(2, 20, "/b", "9.9.9.9", 0, uri="/b/x"),
        )
        result = validate_trace(trace, HostMap({}), location="/a")
        assert result.checked == 1
        assert result.verdicts[0].location == "/a"

    def test_justifications_never_cite_later_directives(self):
        rng = random.Random(31)
        for _ in range(15):
            run = run_simulation(random_config(rng), seed=rng.randrange(10**6), n=20)
            result = validate_trace(run.trace(), run.host_map)
            for verdict in result.verdicts:
                request_stamp = (verdict.snapshot_stamp[0], verdict.snapshot_stamp[1])
                for directive in verdict.expected.matched:
                    assert directive.stamp < request_stamp

    def test_validation_is_deterministic(self):
        run = run_simulation(EXAMPLE_CONFIG, seed=3, n=30, mutation="SWAP_ORDERING")
        first = validate_trace(run.trace(), run.host_map)
        second = validate_trace(run.trace(), run.host_map)
        assert first.verdicts == second.verdicts
        assert first.violations == second.violations


class TestExplain:
    def flipped_violation(self):
        run = run_simulation(EXAMPLE_CONFIG, seed=11, n=50)
        trace = run.trace()
        for event in trace.events:
            if event.type_name != ACCESS_REQUEST:
                continue
            if (
                event.properties["location"] == "/private"
                and event.properties["request"].startswith("goodguys.org ")
            ):
                event.properties["access_code"] = 403
                break
        result = validate_trace(trace, run.host_map)
        return result.violations[0]

    def test_explanation_names_the_ordering_rule_and_directives(self):
        violation = self.flipped_violation()
        text = explain(violation)
        assert "ordering=allow,deny" in text
        assert "rule A" in text
        assert "Allow from goodguys.org" in text
        assert "expected allowed, server answered denied" in text

    def test_empty_justification_wording(self):
        trace = trace_of(request_rec(1, 10, "/p", "9.9.9.9", 403))
        violation = validate_trace(trace, HostMap({})).violations[0]
        text = explain(violation)
        assert "no matching directives; default-allow under deny,allow" in text

    def test_explain_is_deterministic(self):
        violation = self.flipped_violation()
        assert explain(violation) == explain(violation)

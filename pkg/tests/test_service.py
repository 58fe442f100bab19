"""HTTP service endpoints and their parity with the core package."""

import pytest

from conftest import EXAMPLE_CONFIG
from thirdeye.harness import run_simulation
from thirdeye.service import in_process_client


@pytest.fixture(scope="module")
def client():
    with in_process_client() as c:
        yield c


def simulate_payload(**overrides):
    payload = {"config_text": EXAMPLE_CONFIG, "seed": 1, "count": 20}
    payload.update(overrides)
    return payload


class TestHealth:
    def test_health(self, client):
        data = client.get("/health").json()
        assert data["status"] == "ok"


class TestSimulate:
    def test_returns_a_loadable_trace(self, client):
        data = client.post("/simulate", json=simulate_payload()).json()
        assert data["trace"].startswith("thirdeye-trace v1 epoch=")
        assert len(data["access_codes"]) == 20
        assert data["emitted"] == 20 + 5  # requests plus config reads

    def test_codes_match_the_core_run(self, client):
        data = client.post("/simulate", json=simulate_payload()).json()
        core = run_simulation(EXAMPLE_CONFIG, seed=1, n=20)
        assert tuple(data["access_codes"]) == core.codes

    def test_custom_host_map(self, client):
        host_map = "onlyhost.example 10.1.2.3\n"
        data = client.post(
            "/simulate", json=simulate_payload(host_map_text=host_map, count=5)
        ).json()
        assert data["host_map"] == host_map

    def test_unknown_mutation_is_422(self, client):
        response = client.post("/simulate", json=simulate_payload(mutation="NOPE"))
        assert response.status_code == 422
        assert response.json()["error"] == "UnknownMutation"

    def test_bad_config_is_422(self, client):
        response = client.post(
            "/simulate", json=simulate_payload(config_text="Allow from all\n")
        )
        assert response.status_code == 422
        assert response.json()["error"] == "ConfigParseError"


class TestValidate:
    def test_clean_trace(self, client):
        sim = client.post("/simulate", json=simulate_payload()).json()
        data = client.post(
            "/validate", json={"trace": sim["trace"], "host_map_text": sim["host_map"]}
        ).json()
        assert data == {
            "checked": 20,
            "passed": 20,
            "failed": 0,
            "violations": [],
        }

    def test_mutated_trace_reports_violations(self, client):
        sim = client.post(
            "/simulate", json=simulate_payload(mutation="INVERT_DECISION", count=10)
        ).json()
        data = client.post(
            "/validate", json={"trace": sim["trace"], "host_map_text": sim["host_map"]}
        ).json()
        assert data["failed"] == 10
        violation = data["violations"][0]
        assert violation["expected"]["ordering"] in ("allow,deny", "deny,allow")
        assert "expected" in violation["explanation"]

    def test_garbage_trace_is_422(self, client):
        response = client.post(
            "/validate", json={"trace": "garbage", "host_map_text": ""}
        )
        assert response.status_code == 422
        assert response.json()["error"] == "MalformedRecord"


class TestQueryAndReport:
    def test_query_denied_requests(self, client):
        sim = client.post("/simulate", json=simulate_payload()).json()
        data = client.post(
            "/query",
            json={
                "trace": sim["trace"],
                "types": ["Access_request"],
                "where": ["access_code != 0"],
            },
        ).json()
        assert data["count"] == len(data["events"])
        assert all(e["properties"]["access_code"] != 0 for e in data["events"])

    def test_query_time_window(self, client):
        sim = client.post("/simulate", json=simulate_payload()).json()
        data = client.post(
            "/query", json={"trace": sim["trace"], "from_ns": 0, "to_ns": 3000}
        ).json()
        assert [e["seq"] for e in data["events"]] == [1, 2, 3]

    def test_bad_predicate_is_422(self, client):
        sim = client.post("/simulate", json=simulate_payload(count=3)).json()
        response = client.post(
            "/query", json={"trace": sim["trace"], "where": ["color = red"]}
        )
        assert response.status_code == 422

    def test_report_counts(self, client):
        sim = client.post("/simulate", json=simulate_payload()).json()
        data = client.post("/report", json={"trace": sim["trace"]}).json()
        assert data["granted"] + data["denied"] == 20
        assert data["per_type"]["Access_request"] == 20
        assert "granted" in data["text"]
        assert any(line.startswith("granted=") for line in data["kv_lines"])


class TestSchemaCheck:
    def test_good_schema(self, client):
        data = client.post(
            "/schema/check",
            json={"schema_text": "type Base { a:integer=3 }\ntype Kid : Base { b:string }\n"},
        ).json()
        assert data["ok"] is True
        names = [t["name"] for t in data["types"]]
        assert names == ["Base", "Kid"]

    def test_bad_schema_reports_errors(self, client):
        data = client.post(
            "/schema/check", json={"schema_text": "type Kid : Ghost { a:integer }\n"}
        ).json()
        assert data["ok"] is False
        assert data["errors"]


class TestMutants:
    def test_all_detected(self, client):
        data = client.post(
            "/mutants", json={"config_text": EXAMPLE_CONFIG, "seed": 1, "count": 50}
        ).json()
        assert data["all_detected"] is True
        assert len(data["outcomes"]) == 6
        assert all(o["violations"] >= 1 for o in data["outcomes"])

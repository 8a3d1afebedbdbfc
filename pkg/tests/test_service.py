import json

import pytest
from fastapi.testclient import TestClient

from nca.realtime import RealtimeEngine
from nca.service import create_app, ranking_bytes


class FakeClock:
    def __init__(self, start=1_000_000):
        self.now = start

    def __call__(self):
        return self.now

    def advance(self, ms):
        self.now += ms


@pytest.fixture()
def engine(fixture_model, fixture_study):
    return RealtimeEngine(fixture_model, fixture_study, clock=FakeClock())


@pytest.fixture()
def client(engine):
    app = create_app(engine)
    with TestClient(app) as c:
        yield c


class TestEndpoints:
    def test_health(self, client):
        body = client.get("/api/health").json()
        assert body["status"] == "ok"

    def test_measurements_batch_statuses(self, client):
        r = client.post("/api/measurements", json={"samples": [
            {"element": "ct-fan-1g-a", "quantity": "p_mw", "value": 1.4, "timestamp": 100},
            {"element": "nope", "quantity": "p_mw", "value": 1.0, "timestamp": 100},
            {"element": "ct-fan-1g-a", "quantity": "wattage", "value": 2.0, "timestamp": 100},
        ]})
        assert r.status_code == 200
        results = r.json()["results"]
        assert [x["accepted"] for x in results] == [True, False, False]
        assert results[1]["reason"] == "unknown-element"
        assert results[2]["reason"] == "unknown-quantity"

    def test_measurements_schema_rejects_non_numeric(self, client):
        r = client.post("/api/measurements", json={"samples": [
            {"element": "ct-fan-1g-a", "quantity": "p_mw", "value": "plenty",
             "timestamp": 100},
        ]})
        assert r.status_code == 422

    def test_violations_503_before_first_cycle(self, client):
        assert client.get("/api/violations").status_code == 503
        assert client.get("/api/ranking").status_code == 503

    def test_violations_after_cycle(self, client, engine):
        engine.run_cycle()
        body = client.get("/api/violations").json()
        assert body["sequence"] == 1
        assert len(body["contingencies"]) == 6
        first = body["contingencies"][0]
        assert {"contingency", "kind", "status", "severity_index", "counts", "rows"} <= set(first)
        row = first["rows"][0]
        assert set(row) == {"bus_id", "nominal_kv", "voltage_pct", "class"}

    def test_ranking_bytes_are_canonical(self, client, engine):
        engine.run_cycle()
        r = client.get("/api/ranking")
        assert r.content == ranking_bytes(engine.latest_cycle().ranking)
        ranking = json.loads(r.content)
        assert ranking[0]["rank"] == 1
        assert ranking[0]["contingency"] == "y-winding-outage"

    def test_snapshot_summary(self, client, engine):
        client.post("/api/measurements", json={"samples": [
            {"element": "ct-fan-1g-a", "quantity": "p_mw", "value": 3.0, "timestamp": 5},
        ]})
        body = client.get("/api/snapshot").json()
        assert body["measured_loads"] == ["ct-fan-1g-a"]
        assert body["measured_keys"] == 1

    def test_whatif_known_plan(self, client):
        r = client.post("/api/whatif", json={
            "contingency": "y-winding-outage", "ras_plan": "fbt-to-uat",
        })
        assert r.status_code == 200
        body = r.json()
        assert body["cleared"] is True
        assert body["max_drop_vs_steady_state_pct"] <= 2.0
        dead_rows = [x for x in body["violations_before"] if x["class"] == "de-energized"]
        assert len(dead_rows) >= 5

    def test_whatif_inline_actions(self, client):
        r = client.post("/api/whatif", json={
            "contingency": "tie-breaker-stuck",
            "actions": [{"kind": "open-breaker", "breaker": "2S-normal-in"}],
        })
        assert r.status_code == 200
        assert r.json()["cleared"] is True

    def test_whatif_validation_error(self, client):
        r = client.post("/api/whatif", json={"contingency": "ghost"})
        assert r.status_code == 422
        assert "ghost" in r.json()["detail"]

    def test_history_endpoint(self, client, engine):
        engine.run_cycle()
        engine._clock.advance(1000)
        engine.run_cycle()
        records = client.get("/api/history").json()
        assert len(records) == 2
        bounded = client.get(
            "/api/history", params={"from": records[1]["timestamp"], "to": 2**60}
        ).json()
        assert len(bounded) == 1
        assert client.get("/api/history", params={"from": 5, "to": 1}).status_code == 422

    def test_model_info(self, client, fixture_model):
        body = client.get("/api/model").json()
        assert len(body["buses"]) == len(fixture_model.buses)
        assert "DE03" in body["breakers"]
        assert "loca-cooling-fans" in body["load_groups"]
        assert {c["id"] for c in body["contingencies"]} >= {"y-winding-outage"}
        assert {p["id"] for p in body["plans"]} >= {"fbt-to-uat"}


class TestStream:
    def test_subscription_delivers_each_cycle(self, engine):
        q = engine.subscribe()
        first = engine.run_cycle()
        engine._clock.advance(1000)
        second = engine.run_cycle()
        assert q.get(timeout=1.0) is first
        assert q.get(timeout=1.0) is second
        engine.unsubscribe(q)
        engine._clock.advance(1000)
        engine.run_cycle()
        assert q.empty()

    def test_sse_event_format(self, engine):
        from nca.service import _sse_event

        cycle = engine.run_cycle()
        text = _sse_event(cycle)
        assert text.startswith("event: cycle\ndata: ")
        assert text.endswith("\n\n")
        payload = json.loads(text.split("data: ", 1)[1])
        assert payload["sequence"] == 1
        assert payload["top_contingency"] == "y-winding-outage"
        assert "duration_ms" in payload and "base_violations" in payload

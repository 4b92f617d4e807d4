import json
import threading

import pytest
from fastapi.testclient import TestClient

from fuzzycfg.modelio import load_fixture
from fuzzycfg.service import SessionStore, create_app, replay_log

OPTIMUM = [
    "S1", "S2", "S3", "S5", "S7", "S9", "S10", "S12",
    "S15", "S18", "S20", "S23", "S25", "S28",
]


@pytest.fixture()
def client():
    return TestClient(create_app())


@pytest.fixture()
def session(client):
    response = client.post("/sessions", json={"document": load_fixture("conveyor")})
    assert response.status_code == 200
    return response.json()["session"]


def selections(result_doc):
    return dict(
        tuple(pair) for pair in result_doc["optimal_configurations"][0]["selections"]
    )


class TestSessions:
    def test_create_returns_session_at_revision_zero(self, client, session):
        assert session == "s1"
        result = client.get(f"/sessions/{session}/result").json()
        assert result == {"status": "empty", "revision": 0}

    def test_invalid_document_rejected_with_issues(self, client):
        response = client.post(
            "/sessions", json={"document": "format_version: 1\n"}
        )
        assert response.status_code == 422
        detail = response.json()["detail"]
        assert detail["reason"] == "model-invalid"
        assert any("no communities" in issue for issue in detail["issues"])

    def test_unknown_session_is_404(self, client):
        response = client.get("/sessions/zz/result")
        assert response.status_code == 404
        assert response.json()["detail"]["reason"] == "session-not-found"


class TestRuns:
    def test_baseline_run_finds_known_optimum(self, client, session):
        client.post(f"/sessions/{session}/runs")
        result = client.get(f"/sessions/{session}/result").json()
        assert result["status"] == "ready" and result["revision"] == 0
        row = [sol for _, sol in result["result"]["optimal_configurations"][0]["selections"]]
        assert row == OPTIMUM

    def test_cell_edit_changes_the_selection(self, client, session):
        update = {
            "kind": "cell-edit",
            "relation": "functions_solutions",
            "row": "F3",
            "col": "S4",
            "value": 0.95,
        }
        response = client.post(f"/sessions/{session}/updates", json=update)
        assert response.json() == {"accepted": True, "revision": 1}
        client.post(f"/sessions/{session}/runs")
        result = client.get(f"/sessions/{session}/result").json()
        assert result["revision"] == 1
        assert selections(result["result"])["F3"] == "S4"

    def test_rejected_update_leaves_revision_alone(self, client, session):
        update = {
            "kind": "cell-edit",
            "relation": "functions_solutions",
            "row": "F3",
            "col": "S4",
            "value": 1.4,
        }
        response = client.post(f"/sessions/{session}/updates", json=update)
        body = response.json()
        assert body["accepted"] is False
        assert any("outside [0, 1]" in r for r in body["reasons"])
        client.post(f"/sessions/{session}/runs")
        assert client.get(f"/sessions/{session}/result").json()["revision"] == 0

    def test_result_reflects_only_latest_revision(self, client, session):
        for value in (0.95, 0.2):
            client.post(
                f"/sessions/{session}/updates",
                json={
                    "kind": "cell-edit",
                    "relation": "functions_solutions",
                    "row": "F3",
                    "col": "S4",
                    "value": value,
                },
            )
        client.post(f"/sessions/{session}/runs")
        result = client.get(f"/sessions/{session}/result").json()
        assert result["revision"] == 2
        assert selections(result["result"])["F3"] == "S3"


class TestSupersession:
    def test_mid_run_update_discards_stale_result(self, client, session):
        store = client.app.state.store
        sess = store.get(session)
        fired = threading.Event()

        def hook(kind, payload):
            if kind == "phase-finished" and payload.get("phase") == 2 and not fired.is_set():
                fired.set()
                sess.post_update(
                    {
                        "kind": "cell-edit",
                        "relation": "functions_solutions",
                        "row": "F3",
                        "col": "S4",
                        "value": 0.95,
                    }
                )

        sess.mid_run_hook = hook
        client.post(f"/sessions/{session}/runs")
        assert fired.is_set()
        result = client.get(f"/sessions/{session}/result").json()
        # only the rerun against revision 1 is ever published
        assert result["revision"] == 1
        assert selections(result["result"])["F3"] == "S4"
        ready = [e for e in sess.events if e.kind == "result-ready"]
        assert [e.revision for e in ready] == [1]


class TestEvents:
    def test_stream_is_ordered_ndjson(self, client, session):
        client.post(f"/sessions/{session}/runs")
        response = client.get(f"/sessions/{session}/events")
        assert response.headers["content-type"].startswith("application/x-ndjson")
        events = [json.loads(line) for line in response.text.splitlines()]
        assert [e["seq"] for e in events] == list(range(len(events)))
        kinds = [e["kind"] for e in events]
        assert kinds[0] == "phase-started"
        assert kinds[-1] == "result-ready"
        phases = [e["payload"]["phase"] for e in events if e["kind"] == "phase-started"]
        assert phases == [1, 2, 3, 4]

    def test_from_seq_skips_prefix(self, client, session):
        client.post(f"/sessions/{session}/runs")
        full = client.get(f"/sessions/{session}/events").text.splitlines()
        tail = client.get(f"/sessions/{session}/events", params={"from_seq": 3}).text.splitlines()
        assert tail == full[3:]

    def test_update_events_recorded(self, client, session):
        client.post(
            f"/sessions/{session}/updates",
            json={"kind": "remove-agent", "id": "F1"},
        )
        store = client.app.state.store
        kinds = store.get(session).event_kinds()
        assert kinds == ["update-rejected"]


class TestReplay:
    def test_update_log_replays_to_identical_result(self, tmp_path):
        store = SessionStore(log_dir=tmp_path)
        client = TestClient(create_app(store))
        response = client.post("/sessions", json={"document": load_fixture("conveyor")})
        sid = response.json()["session"]
        client.post(
            f"/sessions/{sid}/updates",
            json={
                "kind": "cell-edit",
                "relation": "functions_solutions",
                "row": "F3",
                "col": "S4",
                "value": 0.95,
            },
        )
        client.post(f"/sessions/{sid}/runs")
        live = client.get(f"/sessions/{sid}/result").json()

        lines = (tmp_path / f"{sid}.jsonl").read_text().splitlines()
        replayed = replay_log(lines)
        assert replayed.get_result()["result"] == live["result"]
        assert replayed.get_result()["revision"] == live["revision"]

    def test_replay_requires_model_entry(self):
        with pytest.raises(ValueError, match="model entry"):
            replay_log([json.dumps({"type": "run"})])

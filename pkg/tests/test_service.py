import time

import pytest
from fastapi.testclient import TestClient

from chesshap.engine import EngineRegistry, EvaluatorDescriptor
from chesshap.service import ServiceConfig, build_app

ROOKS_VS_QUEEN = "8/2k5/2q5/8/4R3/4RK2/8/8 w - - 0 1"
KINGS_ONLY = "8/2k5/8/8/8/5K2/8/8 w - - 0 1"


def make_registry() -> EngineRegistry:
    registry = EngineRegistry()
    registry.register(
        EvaluatorDescriptor(id="blind-knights", kind="material", values=(("N", 0),))
    )
    return registry


@pytest.fixture()
def client():
    app = build_app(ServiceConfig(registry=make_registry()))
    with TestClient(app) as c:
        yield c


def wait_done(client, job_id, timeout=15.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/jobs/{job_id}").json()
        if doc["state"] in ("done", "failed"):
            return doc
        time.sleep(0.01)
    raise AssertionError(f"job {job_id} did not finish: {doc}")


class TestExplainEndpoint:
    def test_valid_request_returns_job_id(self, client):
        response = client.post("/explain", json={"fen": ROOKS_VS_QUEEN, "evaluator_id": "material"})
        assert response.status_code == 202
        assert "job_id" in response.json()

    def test_garbage_fen_is_400(self, client):
        assert client.post("/explain", json={"fen": "garbage"}).status_code == 400
        no_kings = "8/8/8/8/8/8/8/8 w - - 0 1"
        assert client.post("/explain", json={"fen": no_kings}).status_code == 400

    def test_unknown_evaluator_is_404(self, client):
        response = client.post(
            "/explain", json={"fen": ROOKS_VS_QUEEN, "evaluator_id": "leela"}
        )
        assert response.status_code == 404

    def test_unknown_job_is_404(self, client):
        assert client.get("/jobs/nope").status_code == 404

    def test_kings_only_job_completes_empty(self, client):
        job_id = client.post("/explain", json={"fen": KINGS_ONLY}).json()["job_id"]
        doc = wait_done(client, job_id)
        assert doc["state"] == "done"
        assert doc["result"]["contributions"] == []
        assert doc["result"]["base_value"] == 0.5

    def test_explain_document_values(self, client):
        job_id = client.post(
            "/explain", json={"fen": ROOKS_VS_QUEEN, "evaluator_id": "material"}
        ).json()["job_id"]
        doc = wait_done(client, job_id)
        result = doc["result"]
        assert result["method"] == "exact"
        assert [c["square"] for c in result["contributions"]] == ["e3", "e4", "c6"]
        total = result["base_value"] + sum(c["phi"] for c in result["contributions"])
        assert total == pytest.approx(result["full_value"], abs=1e-9)
        assert doc["progress"]["done"] == doc["progress"]["total"] == 8

    def test_progress_monotone_during_sampling(self, client):
        # 18 pieces forces the sampling path; poll while it runs
        fen = "rnbqk3/pppp4/8/8/8/8/PPPP4/RNBQK3 w - - 0 1"
        job_id = client.post(
            "/explain",
            json={"fen": fen, "max_evaluations": 2000, "seed": 7},
        ).json()["job_id"]
        seen = []
        deadline = time.time() + 30
        while time.time() < deadline:
            doc = client.get(f"/jobs/{job_id}").json()
            seen.append(doc["progress"]["done"])
            if doc["state"] in ("done", "failed"):
                break
            time.sleep(0.005)
        assert doc["state"] == "done"
        assert seen == sorted(seen)
        assert doc["result"]["method"] == "sampling"

    def test_identical_seeded_requests_identical_payloads(self, client):
        request = {"fen": ROOKS_VS_QUEEN, "max_evaluations": 100, "seed": 42}
        first = wait_done(client, client.post("/explain", json=request).json()["job_id"])
        second = wait_done(client, client.post("/explain", json=request).json()["job_id"])
        assert first["result"] == second["result"]

    def test_queue_full_is_429(self):
        config = ServiceConfig(registry=make_registry(), queue_depth=1)
        app = build_app(config)
        with TestClient(app) as client:
            fen = "rnbqk3/pppp4/8/8/8/8/PPPP4/RNBQK3 w - - 0 1"
            body = {"fen": fen, "max_evaluations": 5000, "seed": 1}
            codes = [client.post("/explain", json=body).status_code for _ in range(6)]
            assert 429 in codes


class TestCompareEndpoint:
    def test_material_vs_blind_knights(self, client):
        fen = "4k3/8/2n5/8/3N4/8/2R5/4K3 w - - 0 1"
        job_id = client.post(
            "/compare",
            json={"fen": fen, "evaluator_a": "material", "evaluator_b": "blind-knights"},
        ).json()["job_id"]
        doc = wait_done(client, job_id)
        assert doc["state"] == "done"
        deltas = doc["result"]["deltas"]
        assert deltas[0]["piece"] == "knight"
        assert deltas[1]["piece"] == "knight"
        magnitudes = [abs(d["delta"]) for d in deltas]
        assert magnitudes == sorted(magnitudes, reverse=True)

    def test_same_engine_zero_deltas(self, client):
        job_id = client.post(
            "/compare",
            json={"fen": ROOKS_VS_QUEEN, "evaluator_a": "material", "evaluator_b": "material"},
        ).json()["job_id"]
        doc = wait_done(client, job_id)
        assert all(d["delta"] == 0.0 for d in doc["result"]["deltas"])

    def test_unknown_second_engine_404(self, client):
        response = client.post(
            "/compare",
            json={"fen": ROOKS_VS_QUEEN, "evaluator_a": "material", "evaluator_b": "nope"},
        )
        assert response.status_code == 404


class TestEnginesEndpoint:
    def test_lists_registry(self, client):
        doc = client.get("/engines").json()
        ids = [e["id"] for e in doc["engines"]]
        assert ids == ["blind-knights", "material"]
        material = next(e for e in doc["engines"] if e["id"] == "material")
        assert material["root_limit"] == {"movetime": 5000}
        assert material["perturb_limit"] == {"movetime": 100}

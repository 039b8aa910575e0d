"""HTTP service endpoints exercised through the in-process test client."""

import pytest
from fastapi.testclient import TestClient

import geo
from gausskit import __version__
from gausskit.report import to_jsonable
from gausskit.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def spec_body(spec, **config):
    body = {"spec": to_jsonable(spec.to_obj())}
    if config:
        body["config"] = config
    return body


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_classify_cylinder(client):
    resp = client.post("/classify",
                       json=spec_body(geo.veronese_cylinder(), samples=4))
    assert resp.status_code == 200
    body = resp.json()
    assert body["verdict"] == "Cylinder"
    assert body["exit_code"] == 0
    assert body["document"]["schema"] == "gausskit/verdict/v1"
    assert body["document"]["r"] == 2


def test_classify_cone_vertex_in_document(client):
    resp = client.post("/classify",
                       json=spec_body(geo.veronese_cone(), samples=4))
    body = resp.json()
    assert body["verdict"] == "Cone"
    assert body["document"]["vertex_flat"] is not None


def test_classify_hypothesis_failure(client):
    resp = client.post("/classify",
                       json=spec_body(geo.sacksteder_ruled(), samples=4))
    body = resp.json()
    assert body["verdict"] == "HypothesisFailure"
    assert body["exit_code"] == 2
    assert body["document"]["reason"] == "N - n >= 2"


def test_analyze_chart(client):
    resp = client.post(
        "/analyze",
        json={"spec": {"kind": "chart",
                       "map": to_jsonable(geo.paraboloid_chart().to_obj())},
              "config": {"samples": 4}})
    assert resp.status_code == 200
    doc = resp.json()["document"]
    assert doc["kind"] == "chart"
    assert doc["rank_profile"]["r"] == 2


def test_analyze_ruled_has_leaves(client):
    resp = client.post("/analyze",
                       json=spec_body(geo.veronese_cylinder(), samples=3))
    doc = resp.json()["document"]
    assert doc["kind"] == "ruled"
    assert len(doc["leaves"]) == 3
    assert all("decomposition" in leaf for leaf in doc["leaves"])


def test_config_is_echoed_and_validated(client):
    resp = client.post("/classify",
                       json=spec_body(geo.veronese_cylinder(),
                                      samples=4, seed=9, tol_rank=1e-9))
    doc = resp.json()["document"]
    assert doc["config"]["seed"] == 9
    assert doc["config"]["tol_rank"] == 1e-9
    bad = client.post("/classify",
                      json=spec_body(geo.veronese_cylinder(), samples=0))
    assert bad.status_code == 422


def test_malformed_spec_rejected(client):
    resp = client.post("/classify", json={"spec": {"kind": "bogus"}})
    assert resp.status_code == 400
    body = resp.json()
    assert body["error_type"] == "SpecValidationError"
    assert "bogus" in body["detail"]
    assert client.post("/classify", json={"spec": {}}).status_code == 422


def test_corpus_generate(client):
    resp = client.post("/corpus/generate", json={"seed": 0})
    assert resp.status_code == 200
    body = resp.json()
    assert body["manifest"]["count"] == len(body["entries"])
    assert body["pairs"] is None
    names = {e["name"] for e in body["entries"]}
    assert {"sacksteder", "veronese_cylinder", "veronese_cone"} <= names


def test_corpus_generate_with_pairs(client):
    resp = client.post("/corpus/generate",
                       json={"seed": 0, "include_pairs": True})
    body = resp.json()
    assert len(body["pairs"]) == 5
    directions = {p["direction"] for p in body["pairs"]}
    assert directions == {"cone_to_cylinder", "cylinder_to_cone"}

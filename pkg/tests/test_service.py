import json
import math

import pytest
from fastapi.testclient import TestClient

from conftest import small_config
from degenlab.service import create_app

PI = math.pi


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def _body(**overrides):
    return {"config": json.loads(small_config(**overrides).model_dump_json())}


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_solve_endpoint(client):
    resp = client.post("/experiments/solve", json=_body())
    assert resp.status_code == 200
    payload = resp.json()
    assert payload["passed"] is True
    assert payload["report"]["k_source"] == "auto"
    assert len(payload["report"]["trace"]) == 5


def test_unknown_keys_rejected_with_422(client):
    body = _body()
    body["config"]["grid"]["bogus"] = 1
    resp = client.post("/experiments/solve", json=body)
    assert resp.status_code == 422
    body = _body()
    body["extra_top_level"] = 1
    resp = client.post("/experiments/solve", json=body)
    assert resp.status_code == 422


def test_domain_error_maps_to_400(client):
    body = _body(
        cylinder={
            "vertex_x": [PI / 2, PI / 2],
            "vertex_t": 0.4,
            "theta": 0.35,
            "rho": 9.0,
            "sigma": 0.5,
        }
    )
    resp = client.post("/experiments/solve", json=body)
    assert resp.status_code == 400
    assert "cylinder" in resp.json()["detail"]


def test_verify_endpoints(client):
    for endpoint in (
        "/experiments/verify-energy",
        "/experiments/degiorgi-trace",
        "/experiments/verify-linfty",
    ):
        resp = client.post(endpoint, json=_body())
        assert resp.status_code == 200
        assert resp.json()["passed"] is True


def test_lemma_endpoint(client):
    resp = client.post(
        "/checks/lemma", json={"C": 2.0, "b": 4.0, "alpha": 0.5, "Y0": 1e-6, "j_max": 30}
    )
    assert resp.status_code == 200
    assert resp.json()["passed"] is True
    resp = client.post(
        "/checks/lemma", json={"C": -1.0, "b": 4.0, "alpha": 0.5, "Y0": 1e-6}
    )
    assert resp.status_code == 400


def test_steklov_endpoint(client):
    resp = client.post("/checks/steklov", json={**_body(), "levels": 3})
    assert resp.status_code == 200
    assert resp.json()["passed"] is True


def test_interpolation_endpoint(client):
    resp = client.post("/checks/interpolation", json={**_body(), "r": 2.0, "s": 2.0})
    assert resp.status_code == 200
    payload = resp.json()
    assert payload["passed"] is True
    assert payload["report"]["q"] == pytest.approx(4.0)


def test_mms_endpoint(client):
    resp = client.post(
        "/experiments/mms-convergence", json={**_body(), "levels": 2, "min_order": 1.5}
    )
    assert resp.status_code == 200
    assert resp.json()["passed"] is True


def test_calibrate_endpoint_requires_config(client):
    resp = client.post("/experiments/calibrate", json={"refinements": 1})
    assert resp.status_code == 400


def test_calibrate_endpoint_single_config(client):
    resp = client.post("/experiments/calibrate", json={**_body(), "refinements": 0})
    assert resp.status_code == 200
    payload = resp.json()
    assert len(payload["report"]["rows"]) == 1

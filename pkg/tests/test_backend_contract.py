from __future__ import annotations

from typing import Any

from fastapi.testclient import TestClient

import backend.main as backend
from thetastrat import __version__


def vortex_payload(**extra: Any) -> dict[str, Any]:
    return {
        "group": {"type": "GL1"},
        "x": [{"weight": [1]}],
        "v": [{"weight": [1]}],
        "b": [[1]],
        "chi": [2],
        "degree": [-1],
        "gamma": 1,
        **extra,
    }


def test_health_reports_version_and_schema():
    with TestClient(backend.fastapi_app) as client:
        response = client.get("/api/health")

    assert response.status_code == 200
    assert response.json() == {"status": "ok", "version": __version__, "schema": "v1"}


def test_run_returns_the_versioned_report():
    with TestClient(backend.fastapi_app) as client:
        response = client.post("/api/run/strata", json=vortex_payload())

    assert response.status_code == 200
    report = response.json()
    assert report["schema"] == "v1"
    assert report["command"] == "strata"
    assert report["result"]["count"] == 2


def test_hn_opt_over_http():
    with TestClient(backend.fastapi_app) as client:
        response = client.post("/api/run/hn-opt", json=vortex_payload())

    assert response.status_code == 200
    assert response.json()["result"]["certificateVerified"] is True


def test_request_validation_never_echoes_the_submitted_configuration():
    marker = "do-not-echo-this-value"

    with TestClient(backend.fastapi_app) as client:
        response = client.post("/api/run/strata", json=vortex_payload(gamma=marker))

    assert response.status_code == 422
    assert marker not in response.text
    for error in response.json()["detail"]:
        assert not {"ctx", "input", "url"} & set(error)


def test_unknown_commands_are_not_found():
    with TestClient(backend.fastapi_app) as client:
        response = client.post("/api/run/explode", json=vortex_payload())

    assert response.status_code == 404


def test_commands_other_than_check_need_a_body():
    with TestClient(backend.fastapi_app) as client:
        response = client.post("/api/run/index")

    assert response.status_code == 422
    assert "needs a run configuration" in response.json()["detail"]


def test_schema_errors_found_while_running_are_unprocessable():
    payload = vortex_payload()
    del payload["gamma"]

    with TestClient(backend.fastapi_app) as client:
        response = client.post("/api/run/strata", json=payload)

    assert response.status_code == 422
    assert response.json()["kind"] == "schema"


def test_mathematical_preconditions_are_conflicts():
    with TestClient(backend.fastapi_app) as client:
        response = client.post("/api/run/strata", json=vortex_payload(gamma="-1"))

    assert response.status_code == 409
    body = response.json()
    assert body["kind"] == "precondition"
    assert "gamma must be nonnegative" in body["detail"]

# tests/test_api.py
import pytest
from fastapi.testclient import TestClient

from main import app

ELLIPTIC = {
    "kind": "genus2",
    "base": {"genus": 1},
    "v1": {"expr": "(E 2 (line 1))"},
    "tau": {"degree": 1, "context": "L1"},
    "xi": {"pattern": "f2=f3=0"},
}


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    assert client.get("/health").json() == {"ok": True, "status": "API running"}


# ========================================
# invariants and reports
# ========================================
def test_invariants_are_stored(client):
    res = client.post("/invariants", json=ELLIPTIC)
    assert res.status_code == 200, res.text
    body = res.json()
    assert body["kind"] == "genus2"
    assert body["report"]["invariants"]["chi"] == 1
    again = client.get(f"/reports/{body['id']}")
    assert again.status_code == 200
    assert again.json()["report"] == body["report"]


def test_invariants_validation(client):
    assert client.post("/invariants", json={"kind": "genus2"}).status_code == 422
    bad = {"kind": "genus2", "v1": {"expr": "(E 2 (line 1))"}}
    res = client.post("/invariants", json=bad)
    assert res.status_code == 400
    assert "elliptic" in res.json()["detail"]


def test_reports_listing(client):
    client.get("/strata/classify", params={"pattern": "f1=0"})
    rows = client.get("/reports", params={"kind": "pgq1"}).json()
    assert rows and all(r["kind"] == "pgq1" for r in rows)
    assert client.get("/reports/999999").status_code == 404


# ========================================
# p_g = q = 1 strata
# ========================================
def test_classify(client):
    res = client.get("/strata/classify", params={"pattern": "f2=f3=0", "tau": "L2"})
    assert res.status_code == 200, res.text
    inv = res.json()["report"]["invariants"]
    assert inv["stratum"] == "III"
    assert inv["h0_A6"] == 4


def test_classify_errors(client):
    assert client.get("/strata/classify", params={"pattern": "f0=0"}).status_code == 400
    assert client.get("/strata/classify", params={"pattern": "f1=f2=f3=0"}).status_code == 422


def test_setup_and_counts(client):
    assert client.get("/strata/setup").json()["ext1_dim"] == 3
    assert client.get("/strata/parameter-counts").json()["clemens_bound"] == 5


def test_matrices(client):
    body = client.get("/strata/matrices").json()
    assert body["residual_shape"] == [16, 9]
    assert body["residual_nonzero"] == body["M_nonzero"] == 39
    assert body["residual_column_profile"] == body["M_row_profile"]
    assert body["M"].splitlines()[0] == "9 16 QQ[f0,f1,f2,f3]"


# ========================================
# stratification runs
# ========================================
def test_stratify_run_round_trip(client):
    res = client.post("/stratify", json={"samples": 5, "lines": 0, "seed": 4})
    assert res.status_code == 200, res.text
    run = res.json()
    assert run["mode"] == "lines"
    assert run["summary"]["samples"] == 5
    detail = client.get(f"/stratify/runs/{run['id']}").json()
    assert [r["trial"] for r in detail["rows"]] == [0, 1, 2, 3, 4]
    assert any(r["id"] == run["id"] for r in client.get("/stratify/runs").json())


def test_stratify_errors(client):
    assert client.post("/stratify", json={"samples": 2, "prime": 9}).status_code == 400
    assert client.post("/stratify", json={"samples": 0}).status_code == 422
    assert client.get("/stratify/runs/999999").status_code == 404


# ========================================
# genus-3 family and genus-2 tools
# ========================================
def test_pg3_examples(client):
    body = client.get("/pg3-examples/1").json()
    assert body["kind"] == "genus3"
    assert body["report"]["invariants"]["moduli_dim"] == 31
    assert client.get("/pg3-examples/4").status_code == 501
    assert client.get("/pg3-examples/-1").status_code == 400


def test_torsion_tool(client):
    res = client.get("/genus2/torsion", params={"n": 4, "deg_tau": 3, "s": [1, 2]})
    assert res.status_code == 200, res.text
    inv = res.json()["invariants"]
    assert inv["structure"]["degree"] == 12
    assert all(r["expected"] == r["oracle"] for r in inv["local"])
    assert client.get("/genus2/torsion", params={"n": 1, "deg_tau": 3}).status_code == 422


def test_horikawa_and_singularity(client):
    body = client.get("/genus2/horikawa", params={"s": 4, "lambda_zero": True}).json()
    assert body["invariants"]["types"] == ["IV_2"]
    sing = client.get("/genus2/singularity", params={"s": 1}).json()
    assert sing["at_P"] == "A_3"
    assert sing["branch_must_avoid_P"] is True


def test_a6_tool(client):
    assert client.post("/genus2/a6", json={}).status_code == 400
    res = client.post("/genus2/a6", json={"pattern": "f2=f3=0", "tau": "[0]"})
    assert res.status_code == 200, res.text
    assert res.json()["report"]["bundles"]["A6_tilde"]["h0"] == 5
    from_file = client.post("/genus2/a6", json={"tuple_file": ELLIPTIC}).json()
    assert from_file["report"]["bundles"]["A6_tilde"]["h0"] == 5
    genus3 = {"kind": "genus3", "v1": {"degrees": [2, 2, 2]}}
    assert client.post("/genus2/a6", json={"tuple_file": genus3}).status_code == 400

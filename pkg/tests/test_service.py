import pytest
from fastapi.testclient import TestClient

from dmkf.repository import load_snapshot
from dmkf.service import create_app
from dmkf.workspace import Workspace

from conftest import run_cli


@pytest.fixture
def workspace(paths, tmp_path):
    return Workspace.load(
        registry_path=paths["registry-extract"],
        plan_paths=[paths["wagga"], paths["gundagai"]],
        snapshot_path=tmp_path / "snap.dmr",
    )


@pytest.fixture
def client(workspace):
    return TestClient(create_app(workspace))


FPCS = "WaggaWaggaLFP/Preparedness/role/FPCs"


def test_plans_listing(client):
    body = client.get("/api/plans").json()
    assert [p["plan_id"] for p in body["plans"]] == ["GundagaiLFP", "WaggaWaggaLFP"]
    wagga = body["plans"][1]
    assert wagga["title"] == "Wagga Wagga Local Flood Plan"
    assert wagga["phases"] == ["Preparedness", "Response"]


def test_elements_filtering(client):
    response = client.get(
        "/api/elements",
        params={"plan": "WaggaWaggaLFP", "phase": "Preparedness", "stereotype": "Role"},
    )
    body = response.json()
    assert body["total"] == 8
    assert [e["name"] for e in body["elements"]] == [
        "SESLC", "WWCC", "SESSHQ", "MSESDHQ", "SES", "SESFWs", "SESUM", "FPCs",
    ]
    assert all(e["mapping"] is None for e in body["elements"])


def test_candidates_payload(client):
    body = client.get("/api/candidates", params={"element": FPCS}).json()
    assert body["stereotype"] == "Role"
    names = [c["name"] for c in body["candidates"]]
    assert names == ["AidAgency", "People", "PreparednessTeam"]
    assert all(c["definition"] for c in body["candidates"])


def test_candidates_agree_with_cli_byte_for_byte(client, paths):
    for name in ("SESLC", "WWCC", "FPCs"):
        element = f"WaggaWaggaLFP/Preparedness/role/{name}"
        _, out, _ = run_cli(
            "candidates",
            "--registry", paths["registry-extract"],
            "--plan", paths["wagga"],
            "--element", element,
        )
        body = client.get("/api/candidates", params={"element": element}).json()
        assert "\n".join(c["name"] for c in body["candidates"]) + "\n" == out


def test_ranked_candidates_include_scores(client):
    body = client.get(
        "/api/candidates", params={"element": FPCS, "ranked": "true"}
    ).json()
    scores = [c["score"] for c in body["candidates"]]
    assert scores == sorted(scores, reverse=True)


def test_commit_roundtrip_and_durability(client, workspace):
    response = client.post(
        "/api/mappings",
        json={"element": FPCS, "concept": "People", "mapper": "practitioner-1"},
    )
    assert response.status_code == 201
    record = response.json()["record"]
    assert record["concept"] == "People"
    assert record["stereotype"] == "Role"

    on_disk = load_snapshot(workspace.snapshot_path)
    assert [m.concept_name for m in on_disk.mappings] == ["People"]

    rows = client.get(
        "/api/elements", params={"plan": "WaggaWaggaLFP", "stereotype": "Role"}
    ).json()["elements"]
    fpcs = next(r for r in rows if r["name"] == "FPCs")
    assert fpcs["mapping"]["concept"] == "People"


def test_unmapped_filter_shrinks_after_commit(client):
    params = {
        "plan": "WaggaWaggaLFP",
        "phase": "Preparedness",
        "stereotype": "Role",
        "unmapped": "true",
    }
    before = client.get("/api/elements", params=params).json()["total"]
    client.post(
        "/api/mappings",
        json={"element": FPCS, "concept": "People", "mapper": "p"},
    )
    after = client.get("/api/elements", params=params).json()["total"]
    assert (before, after) == (8, 7)


def test_candidate_violation_is_409(client):
    response = client.post(
        "/api/mappings",
        json={"element": FPCS, "concept": "Training", "mapper": "p"},
    )
    assert response.status_code == 409
    body = response.json()
    assert body["error_class"] == "CandidateViolation"
    assert body["element"] == FPCS


def test_unknown_element_and_concept_are_404(client):
    assert (
        client.post(
            "/api/mappings",
            json={"element": "WaggaWaggaLFP/Preparedness/role/Nobody",
                  "concept": "People", "mapper": "p"},
        ).status_code
        == 404
    )
    response = client.post(
        "/api/mappings",
        json={"element": FPCS, "concept": "NoSuchConcept", "mapper": "p"},
    )
    assert response.status_code == 404
    assert response.json()["error_class"] == "UnknownConcept"


def test_malformed_bodies_are_400(client):
    assert client.post("/api/mappings", content=b"not json").status_code == 400
    assert client.post("/api/mappings", json={"element": FPCS}).status_code == 400
    assert client.post("/api/mappings", json=[1, 2]).status_code == 400


def test_expected_current_mismatch_is_409(client):
    client.post(
        "/api/mappings", json={"element": FPCS, "concept": "People", "mapper": "p"}
    )
    response = client.post(
        "/api/mappings",
        json={
            "element": FPCS,
            "concept": "PreparednessTeam",
            "mapper": "q",
            "expected_current": None,
        },
    )
    assert response.status_code == 409
    assert response.json()["error_class"] == "SupersessionConflict"
    response = client.post(
        "/api/mappings",
        json={
            "element": FPCS,
            "concept": "PreparednessTeam",
            "mapper": "q",
            "expected_current": "People",
        },
    )
    assert response.status_code == 201


def test_delete_retracts_mapping(client):
    client.post(
        "/api/mappings", json={"element": FPCS, "concept": "People", "mapper": "p"}
    )
    response = client.delete(f"/api/mappings/{FPCS}", params={"mapper": "p"})
    assert response.status_code == 200
    assert response.json()["record"]["concept"] is None
    assert client.delete(f"/api/mappings/{FPCS}").status_code == 404


def test_registry_concept_listing(client):
    body = client.get(
        "/api/registry/concepts",
        params={"phase": "Preparedness", "stereotype": "Role"},
    ).json()
    assert [c["name"] for c in body["concepts"]] == [
        "AidAgency", "People", "PreparednessTeam",
    ]


def test_diagnostics_endpoint(client):
    body = client.get("/api/diagnostics", params={"plan": "WaggaWaggaLFP"}).json()
    assert body["errors"] == 0
    assert body["warnings"] == 0
    assert body["diagnostics"] == []
    assert client.get("/api/diagnostics", params={"plan": "Nope"}).status_code == 404


def test_repository_endpoints_after_transfer(client, workspace, paths):
    for entry_path, concept in (
        (FPCS, "People"),
        ("WaggaWaggaLFP/Preparedness/role/SESLC", "PreparednessTeam"),
        ("WaggaWaggaLFP/Preparedness/role/WWCC", "PreparednessTeam"),
    ):
        assert (
            client.post(
                "/api/mappings",
                json={"element": entry_path, "concept": concept, "mapper": "p"},
            ).status_code
            == 201
        )
    workspace.transfer_plans(["WaggaWaggaLFP"])
    units = client.get(
        "/api/repository/units", params={"concept": "PreparednessTeam"}
    ).json()["units"]
    assert len(units) == 2
    edges = client.get("/api/repository/edges", params={"relation": "isPeer"}).json()[
        "edges"
    ]
    assert len(edges) == 1


def test_bad_query_parameters_are_400(client):
    assert client.get("/api/elements", params={"phase": "Nowhere"}).status_code == 400
    assert client.get("/api/elements", params={"unmapped": "perhaps"}).status_code == 400
    assert (
        client.get("/api/repository/edges", params={"relation": "Sideways"}).status_code
        == 400
    )
    assert client.get("/api/candidates", params={"element": "b/a/d"}).status_code == 404


def test_elements_pagination(client):
    first = client.get("/api/elements", params={"plan": "WaggaWaggaLFP"}).json()
    assert first["page_size"] == 50
    assert first["total"] > 50
    assert len(first["elements"]) == 50
    second = client.get(
        "/api/elements", params={"plan": "WaggaWaggaLFP", "page": 2}
    ).json()
    assert len(second["elements"]) == first["total"] - 50
    paths_seen = {e["path"] for e in first["elements"]} | {
        e["path"] for e in second["elements"]
    }
    assert len(paths_seen) == first["total"]


def test_role_kind_leaves_unmapped_list_once_all_roles_mapped(client):
    roles = ["SESLC", "WWCC", "SESSHQ", "MSESDHQ", "SES", "SESFWs", "SESUM"]
    for role in roles:
        concept = "PreparednessTeam"
        path = f"WaggaWaggaLFP/Preparedness/role/{role}"
        assert (
            client.post(
                "/api/mappings", json={"element": path, "concept": concept, "mapper": "p"}
            ).status_code
            == 201
        )
    assert (
        client.post(
            "/api/mappings", json={"element": FPCS, "concept": "People", "mapper": "p"}
        ).status_code
        == 201
    )
    remaining = client.get(
        "/api/elements",
        params={"plan": "WaggaWaggaLFP", "phase": "Preparedness", "unmapped": "true"},
    ).json()["elements"]
    assert remaining
    assert all(row["kind"] != "role" for row in remaining)

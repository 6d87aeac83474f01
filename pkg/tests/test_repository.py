from datetime import datetime, timezone

import pytest

from dmkf.errors import IntegrityViolation, RegistryMismatch, UsageError
from dmkf.fixtures import fixture_text
from dmkf.mapping import (
    KnowledgeEdge,
    new_session,
    commit_mapping,
    parse_mapping_file,
    transfer,
    unit_id_for,
)
from dmkf.model import ElementRef, Phase, RelationKind
from dmkf.repository import (
    QueryFilter,
    RepositorySnapshot,
    SnapshotFormatError,
    export_snapshot,
    import_snapshot,
    load_snapshot,
    put,
    query,
    query_edges,
    save_snapshot,
)


def fixed_clock():
    stamp = datetime(2026, 3, 1, tzinfo=timezone.utc)
    return lambda: stamp


def build_snapshot(plan, registry, map_fixture):
    session = new_session(registry, fixed_clock())
    records = []
    for entry in parse_mapping_file(fixture_text(map_fixture)):
        records.append(
            commit_mapping(
                session, plan, registry, records, entry.element_path, entry.concept_name,
                entry.mapper,
            )
        )
    result = transfer(plan, records)
    return put(
        RepositorySnapshot.empty(),
        units=result.units,
        edges=result.edges,
        mappings=records,
        registry_fingerprint=registry.fingerprint,
    )


@pytest.fixture
def wagga_snapshot(wagga_plan, extract_registry):
    return build_snapshot(wagga_plan, extract_registry, "wagga-roles-map")


@pytest.fixture
def full_snapshot(wagga_plan, full_registry):
    return build_snapshot(wagga_plan, full_registry, "wagga-full-map")


@pytest.fixture
def edge_snapshot(edges_plan, extract_registry):
    return build_snapshot(edges_plan, extract_registry, "edges-map")


def test_put_then_query_concept(wagga_snapshot):
    units = query(wagga_snapshot, QueryFilter(concept_name="PreparednessTeam"))
    assert len(units) == 7
    people = query(wagga_snapshot, QueryFilter(concept_name="People"))
    assert [u.name for u in people] == ["FPCs"]


def test_put_is_idempotent(wagga_snapshot):
    again = put(
        wagga_snapshot,
        units=list(wagga_snapshot.units.values()),
        edges=list(wagga_snapshot.edges.values()),
        registry_fingerprint=wagga_snapshot.registry_fingerprint,
    )
    assert again == wagga_snapshot
    assert query(again, QueryFilter(concept_name="PreparednessTeam")) == query(
        wagga_snapshot, QueryFilter(concept_name="PreparednessTeam")
    )


def test_put_rejects_dangling_edge(wagga_snapshot):
    ghost = KnowledgeEdge(
        from_unit=next(iter(wagga_snapshot.units)),
        to_unit="feedfacefeedface",
        relation=RelationKind.CONTROLS,
        provenance=ElementRef.parse("X/Response/organisation/a~controls~b"),
    )
    with pytest.raises(IntegrityViolation) as info:
        put(wagga_snapshot, edges=[ghost])
    assert "feedfacefeedface" in str(info.value)


def test_put_guards_registry_fingerprint(wagga_snapshot):
    with pytest.raises(RegistryMismatch):
        put(wagga_snapshot, registry_fingerprint="0" * 16)
    forced = put(wagga_snapshot, registry_fingerprint="0" * 16, force=True)
    assert forced.registry_fingerprint == "0" * 16


def test_query_requires_a_filter(wagga_snapshot):
    with pytest.raises(UsageError):
        query(wagga_snapshot, QueryFilter())
    with pytest.raises(UsageError):
        query_edges(wagga_snapshot)


def test_query_unpopulated_phase_is_empty(wagga_snapshot):
    assert query(
        wagga_snapshot, QueryFilter(plan_id="WaggaWaggaLFP", phase=Phase.RECOVERY)
    ) == []


def test_cross_plan_query_orders_by_plan(wagga_plan, gundagai_plan, extract_registry):
    snapshot = build_snapshot(gundagai_plan, extract_registry, "gundagai-map")
    session = new_session(extract_registry, fixed_clock())
    record = commit_mapping(
        session, wagga_plan, extract_registry, [],
        "WaggaWaggaLFP/Preparedness/activity/RunCommunityEducation", "PublicEducation", "p",
    )
    result = transfer(wagga_plan, [record])
    snapshot = put(
        snapshot,
        units=result.units,
        edges=result.edges,
        mappings=[record],
        registry_fingerprint=extract_registry.fingerprint,
    )
    units = query(snapshot, QueryFilter(concept_name="PublicEducation"))
    assert [u.element.plan_id for u in units] == ["GundagaiLFP", "WaggaWaggaLFP"]


def test_controls_inversion_is_derived(edge_snapshot):
    stored = query_edges(edge_snapshot, relation=RelationKind.CONTROLS)
    derived = query_edges(edge_snapshot, relation=RelationKind.IS_CONTROLLED_BY)
    assert len(stored) == len(derived) == 2
    assert {(e.to_unit, e.from_unit) for e in derived} == {
        (e.from_unit, e.to_unit) for e in stored
    }
    assert all(e.relation is RelationKind.IS_CONTROLLED_BY for e in derived)


def test_involves_is_reversed_participates_in(full_snapshot):
    stored = query_edges(full_snapshot, relation=RelationKind.PARTICIPATES_IN)
    derived = query_edges(full_snapshot, relation=RelationKind.INVOLVES)
    assert stored
    assert {(e.from_unit, e.to_unit) for e in derived} == {
        (e.to_unit, e.from_unit) for e in stored
    }


def test_peer_edges_visible_from_both_endpoints(edge_snapshot):
    seslc = unit_id_for("EdgeFixture/Preparedness/role/SESLC")
    wwcc = unit_id_for("EdgeFixture/Preparedness/role/WWCC")
    from_seslc = query_edges(edge_snapshot, relation=RelationKind.IS_PEER, unit=seslc)
    from_wwcc = query_edges(edge_snapshot, relation=RelationKind.IS_PEER, unit=wwcc)
    assert len(from_seslc) == len(from_wwcc) == 1
    assert from_seslc[0].from_unit == seslc
    assert from_wwcc[0].from_unit == wwcc


def test_export_of_empty_snapshot_is_header_only():
    assert export_snapshot(RepositorySnapshot.empty()) == "meta version=1 registry=-\n"


def test_export_import_round_trip(full_snapshot):
    assert import_snapshot(export_snapshot(full_snapshot)) == full_snapshot


def test_round_trip_preserves_multisets(full_snapshot):
    reloaded = import_snapshot(export_snapshot(full_snapshot))
    assert set(reloaded.units) == set(full_snapshot.units)
    assert set(reloaded.edges) == set(full_snapshot.edges)
    assert reloaded.mappings == full_snapshot.mappings


def test_truncated_file_cites_final_line(full_snapshot):
    text = export_snapshot(full_snapshot)
    truncated = text.rstrip("\n")
    cut = truncated[: truncated.rindex('"') ]  # chop the closing quote of the last record
    last_line = len(cut.splitlines())
    with pytest.raises(SnapshotFormatError) as info:
        import_snapshot(cut)
    assert f"line {last_line}:" in str(info.value)


def test_import_rejects_dangling_edges():
    text = (
        "meta version=1 registry=-\n"
        "edge aaaaaaaaaaaaaaaa bbbbbbbbbbbbbbbb Controls P/Response/organisation/a~controls~b\n"
    )
    with pytest.raises(IntegrityViolation):
        import_snapshot(text)


def test_import_rejects_conflicting_map_records():
    text = (
        "meta version=1 registry=-\n"
        'map P/Preparedness/role/R Role People Preparedness "m" 2026-01-01T00:00:00.000000Z\n'
        'map P/Preparedness/role/R Role People Preparedness "m" 2026-01-01T00:00:01.000000Z\n'
    )
    with pytest.raises(IntegrityViolation):
        import_snapshot(text)


def test_import_rejects_stored_inverse_relations():
    text = (
        "meta version=1 registry=-\n"
        "edge aaaaaaaaaaaaaaaa bbbbbbbbbbbbbbbb isControlledBy P/Response/role/x\n"
    )
    with pytest.raises(SnapshotFormatError):
        import_snapshot(text)


def test_save_and_load_round_trip(tmp_path, full_snapshot):
    target = tmp_path / "snapshot.dmr"
    save_snapshot(target, full_snapshot)
    assert load_snapshot(target) == full_snapshot
    save_snapshot(target, full_snapshot)  # overwrite in place
    assert load_snapshot(target) == full_snapshot


def test_query_answers_stable_under_reput(full_snapshot):
    again = put(
        full_snapshot,
        units=list(full_snapshot.units.values()),
        edges=list(full_snapshot.edges.values()),
        registry_fingerprint=full_snapshot.registry_fingerprint,
    )
    for filt in (
        QueryFilter(concept_name="Training"),
        QueryFilter(phase=Phase.RESPONSE),
        QueryFilter(plan_id="WaggaWaggaLFP"),
    ):
        assert query(again, filt) == query(full_snapshot, filt)

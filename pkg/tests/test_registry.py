import pytest

from dmkf.fixtures import fixture_text
from dmkf.model import Phase, Stereotype
from dmkf.registry import (
    Concept,
    Registry,
    RegistryLoadError,
    candidates,
    concept_lookup,
    load_registry,
    validate_registry,
)


def names(concepts):
    return [c.name for c in concepts]


def test_extract_loads_with_nine_preparedness_concepts(extract_registry):
    assert len(extract_registry.concepts) == 9
    assert all(c.phase is Phase.PREPAREDNESS for c in extract_registry.concepts)


def test_multi_stereotype_annotation(extract_registry):
    team = concept_lookup(extract_registry, "PreparednessTeam", Phase.PREPAREDNESS)
    assert team.stereotypes == frozenset({Stereotype.AGENT, Stereotype.ROLE})


def test_role_candidates_for_preparedness(extract_registry):
    found = candidates(extract_registry, Stereotype.ROLE, Phase.PREPAREDNESS)
    assert names(found) == ["AidAgency", "People", "PreparednessTeam"]


def test_candidates_of_unpopulated_phase_are_empty(extract_registry):
    assert candidates(extract_registry, Stereotype.ROLE, Phase.RECOVERY) == []


def test_activity_candidates(extract_registry):
    found = candidates(extract_registry, Stereotype.ACTIVITY, Phase.PREPAREDNESS)
    assert names(found) == ["PublicEducation", "Training"]


def test_lookup_definitions(extract_registry):
    people = concept_lookup(extract_registry, "People", Phase.PREPAREDNESS)
    assert people.definition == (
        "Collections of human in local communities who are threaten to disaster"
    )
    assert concept_lookup(extract_registry, "People", Phase.RESPONSE) is None
    training = concept_lookup(extract_registry, "Training", Phase.PREPAREDNESS)
    assert training.definition.startswith("An instruction that imparts")


def test_full_catalogue_counts(full_registry):
    assert len(full_registry.concepts) == 92
    counts = full_registry.phase_counts()
    assert counts == {
        Phase.PREVENTION: 21,
        Phase.PREPAREDNESS: 25,
        Phase.RESPONSE: 25,
        Phase.RECOVERY: 21,
    }
    assert full_registry.declared_counts == counts


def test_count_mismatch_names_phase_and_both_numbers():
    text = fixture_text("registry-full92")
    lines = text.splitlines()
    removed = next(i for i, l in enumerate(lines) if "phase Preparedness" in l)
    broken = "\n".join(lines[:removed] + lines[removed + 1 :])
    with pytest.raises(RegistryLoadError) as info:
        load_registry(broken)
    assert any("Preparedness: declared 25, found 24" in p for p in info.value.problems)


def test_validate_flags_empty_stereotype_set():
    registry = Registry(
        concepts=(
            Concept("Lonely", Phase.RESPONSE, frozenset(), "definition text"),
        )
    )
    issues = validate_registry(registry)
    assert len(issues) == 1
    assert issues[0].code == "empty-stereotypes"
    assert "Lonely" in issues[0].message


def test_validate_flags_duplicate_concept():
    concept = Concept("Twin", Phase.RESPONSE, frozenset({Stereotype.GOAL}), "d")
    registry = Registry(concepts=(concept, concept))
    assert any(i.code == "duplicate-concept" for i in validate_registry(registry))


def test_validate_accepts_fixture_registries(extract_registry, full_registry):
    assert validate_registry(extract_registry) == []
    assert validate_registry(full_registry) == []


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("concept X phase Nowhere stereotypes Goal definition \"d\"", "phase"),
        ("concept X phase Response stereotypes Wizard definition \"d\"", "stereotype"),
        ("concept X phase Response stereotypes Goal", "definition"),
        ("concept X phase Response stereotypes Goal definition \"unterminated", "unterminated"),
        ("blob X", "unknown record kind"),
        ("counts Response=1\ncounts Response=1", "duplicate counts"),
    ],
)
def test_load_reports_syntax_problems(line, fragment):
    with pytest.raises(RegistryLoadError) as info:
        load_registry(line)
    assert any(fragment in p for p in info.value.problems)


def test_candidate_sets_partition_the_phase(full_registry):
    for phase in Phase:
        in_phase = {c.name for c in full_registry.concepts if c.phase is phase}
        union = set()
        for stereotype in Stereotype:
            found = candidates(full_registry, stereotype, phase)
            assert [c.name for c in found] == sorted(c.name for c in found)
            for concept in found:
                assert concept.phase is phase
                assert stereotype in concept.stereotypes
            union |= {c.name for c in found}
        assert union == in_phase


def test_fingerprint_tracks_content():
    a = load_registry('concept A phase Response stereotypes Goal definition "x"')
    b = load_registry('concept A phase Response stereotypes Goal definition "y"')
    assert a.fingerprint != b.fingerprint
    again = load_registry('concept A phase Response stereotypes Goal definition "x"')
    assert a.fingerprint == again.fingerprint

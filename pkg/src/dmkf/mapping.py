"""Semantic mapping of plan elements onto registry concepts.

The toolkit automates the clerical half of the mapping step: it filters the
legal candidate concepts for an element (same stereotype, same phase), ranks
them with a transparent token-overlap score, and records the practitioner's
decision as an auditable, supersedable record. ``transfer`` then turns the
decided mappings into knowledge units and typed edges for the repository.

The ranking heuristic is deliberately plain: Jaccard similarity between the
lowercase alphanumeric token sets of the element description and the concept
definition. It only orders the dropdown; the decision stays with the human.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Callable, Sequence

from .errors import (
    CandidateViolation,
    DmkfError,
    NoCandidates,
    StaleSession,
    UnknownConcept,
    UnknownElement,
    ValidationGate,
)
from .model import (
    ElementKind,
    ElementRef,
    OrgKind,
    Phase,
    Plan,
    RelationKind,
    Stereotype,
    enumerate_elements,
    org_relation_ref,
    stereotype_of,
)
from .records import digest16
from .registry import Concept, Registry, candidates, concept_lookup
from .validator import Severity, validate_plan

_TOKEN_RE = re.compile(r"[^\W_]+")


def text_tokens(text: str) -> frozenset[str]:
    """Lowercase maximal alphanumeric runs of the text, as a set."""
    return frozenset(_TOKEN_RE.findall(text.lower()))


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


@dataclass(frozen=True)
class Suggestion:
    concept: Concept
    score: float


def suggest(element: ElementRef, description: str, registry: Registry) -> list[Suggestion]:
    """Score every candidate concept for the element, best first.

    Sorted by (score descending, name ascending). Raises
    :class:`NoCandidates` when the registry offers nothing for the
    element's stereotype and phase — the sign of an under-annotated
    registry, not of an unmappable element.
    """
    stereotype = stereotype_of(element.kind)
    if stereotype is None:
        raise NoCandidates(
            f"elements of kind {element.kind.value!r} yield relationships, "
            "not concept mappings",
            element=element.path,
        )
    pool = candidates(registry, stereotype, element.phase)
    if not pool:
        raise NoCandidates(
            f"registry has no {stereotype.value}-annotated concept "
            f"in phase {element.phase.value}",
            element=element.path,
        )
    element_tokens = text_tokens(description)
    scored = [
        Suggestion(concept, jaccard(element_tokens, text_tokens(concept.definition)))
        for concept in pool
    ]
    scored.sort(key=lambda s: (-s.score, s.concept.name))
    return scored


@dataclass(frozen=True)
class MappingRecord:
    """One practitioner decision binding an element to a concept.

    ``concept_name`` of None records a retraction (the element becomes
    unmapped). ``supersedes`` is the index of the replaced record in the
    append-only audit list.
    """

    element: ElementRef
    stereotype: Stereotype
    concept_name: str | None
    concept_phase: Phase
    mapper: str
    timestamp: datetime
    supersedes: int | None = None


def current_mappings(mappings: Sequence[MappingRecord]) -> dict[str, tuple[int, MappingRecord]]:
    """Latest record per element path, including retractions."""
    current: dict[str, tuple[int, MappingRecord]] = {}
    for index, record in enumerate(mappings):
        current[record.element.path] = (index, record)
    return current


def active_mappings(mappings: Sequence[MappingRecord]) -> dict[str, MappingRecord]:
    """Non-superseded, non-retracted record per element path."""
    return {
        path: record
        for path, (_, record) in current_mappings(mappings).items()
        if record.concept_name is not None
    }


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class MappingSession:
    """Serialized writer context for commits.

    Bound to the registry it was opened against; timestamps strictly
    increase within one session even when the clock stalls.
    """

    registry_fingerprint: str
    clock: Callable[[], datetime] = _utc_now
    _last: datetime | None = field(default=None, repr=False)

    def next_timestamp(self) -> datetime:
        now = self.clock()
        if now.tzinfo is None:
            now = now.replace(tzinfo=timezone.utc)
        now = now.astimezone(timezone.utc)
        if self._last is not None and now <= self._last:
            now = self._last + timedelta(microseconds=1)
        self._last = now
        return now


def new_session(registry: Registry, clock: Callable[[], datetime] | None = None) -> MappingSession:
    if clock is None:
        return MappingSession(registry_fingerprint=registry.fingerprint)
    return MappingSession(registry_fingerprint=registry.fingerprint, clock=clock)


def element_index(plan: Plan) -> dict[str, tuple[ElementRef, Stereotype | None, str]]:
    """Path-keyed view of :func:`enumerate_elements`."""
    return {ref.path: (ref, stereotype, desc) for ref, stereotype, desc in enumerate_elements(plan)}


def commit_mapping(
    session: MappingSession,
    plan: Plan,
    registry: Registry,
    mappings: Sequence[MappingRecord],
    element: ElementRef | str,
    concept_name: str,
    mapper: str,
) -> MappingRecord:
    """Validate and create one mapping record.

    The concept must lie inside the element's filtered candidate set — the
    registry annotation is what narrows the practitioner's choices, and the
    engine refuses anything outside it. Any prior record for the element is
    superseded by the new one. The caller appends the result to its audit
    list (and persists it) under its own write serialization.
    """
    if session.registry_fingerprint != registry.fingerprint:
        raise StaleSession(
            "session was opened against a different registry "
            f"({session.registry_fingerprint} != {registry.fingerprint})"
        )
    ref = ElementRef.parse(element) if isinstance(element, str) else element
    index = element_index(plan)
    if ref.plan_id != plan.plan_id or ref.path not in index:
        raise UnknownElement(f"element {ref.path} does not exist", element=ref.path)
    stereotype = stereotype_of(ref.kind)
    if stereotype is None:
        raise CandidateViolation(
            f"elements of kind {ref.kind.value!r} are not mappable", element=ref.path
        )
    pool = candidates(registry, stereotype, ref.phase)
    pool_names = [c.name for c in pool]
    if concept_name not in pool_names:
        if concept_lookup(registry, concept_name, ref.phase) is None:
            raise UnknownConcept(
                f"concept {concept_name!r} does not exist in phase {ref.phase.value}",
                element=ref.path,
            )
        raise CandidateViolation(
            f"concept {concept_name!r} is outside the candidate set for {ref.path} "
            f"(candidates: {', '.join(pool_names)})",
            element=ref.path,
        )
    prior = current_mappings(mappings).get(ref.path)
    return MappingRecord(
        element=ref,
        stereotype=stereotype,
        concept_name=concept_name,
        concept_phase=ref.phase,
        mapper=mapper,
        timestamp=session.next_timestamp(),
        supersedes=prior[0] if prior is not None else None,
    )


def retract_mapping(
    session: MappingSession,
    mappings: Sequence[MappingRecord],
    element: ElementRef | str,
    mapper: str,
) -> MappingRecord:
    """Create a retraction record superseding the element's active mapping."""
    ref = ElementRef.parse(element) if isinstance(element, str) else element
    prior = current_mappings(mappings).get(ref.path)
    if prior is None or prior[1].concept_name is None:
        raise UnknownElement(f"element {ref.path} has no active mapping", element=ref.path)
    index, record = prior
    return MappingRecord(
        element=record.element,
        stereotype=record.stereotype,
        concept_name=None,
        concept_phase=record.concept_phase,
        mapper=mapper,
        timestamp=session.next_timestamp(),
        supersedes=index,
    )


class SourceModel(Enum):
    """Which model template a knowledge unit's content came from."""

    GOAL = "goal"
    ROLE = "role"
    AGENT = "agent"
    ENVIRONMENT = "environment"
    SCENARIO = "scenario"


SOURCE_MODEL_BY_NAME = {m.value: m for m in SourceModel}

#: Activities are bound into scenarios, triggers live in the agent model and
#: resources in the environment model; the other kinds name their template.
_SOURCE_MODEL_BY_KIND = {
    ElementKind.GOAL: SourceModel.GOAL,
    ElementKind.ROLE: SourceModel.ROLE,
    ElementKind.AGENT: SourceModel.AGENT,
    ElementKind.ACTIVITY: SourceModel.SCENARIO,
    ElementKind.TRIGGER: SourceModel.AGENT,
    ElementKind.RESOURCE: SourceModel.ENVIRONMENT,
}


def unit_id_for(path: str) -> str:
    """Stable unit identifier: truncated SHA-256 of the element path."""
    return digest16(path)


@dataclass(frozen=True)
class KnowledgeUnit:
    """One mapped element, indexed by its concept for repository queries."""

    unit_id: str
    element: ElementRef
    phase: Phase
    concept_name: str
    name: str
    description: str
    source_model: SourceModel


@dataclass(frozen=True)
class KnowledgeEdge:
    """A typed relationship between two knowledge units.

    Only isPeer (endpoints in ascending unit id order), Controls,
    rolePursueGoal and ParticipatesIn are ever stored; isControlledBy and
    Involves are derived at query time so the two directions can never
    drift apart.
    """

    from_unit: str
    to_unit: str
    relation: RelationKind
    provenance: ElementRef


@dataclass(frozen=True)
class TransferResult:
    units: tuple[KnowledgeUnit, ...]
    edges: tuple[KnowledgeEdge, ...]
    skipped: tuple[ElementRef, ...]
    skipped_edges: tuple[str, ...]


def transfer(plan: Plan, mappings: Sequence[MappingRecord]) -> TransferResult:
    """Turn the plan's decided mappings into knowledge units and edges.

    One unit per mapped element; elements that are mappable but undecided
    are reported in ``skipped`` rather than blocking the run. Edges are
    derived from the relationship-bearing constructs: organisation
    relations, interactions (one rolePursueGoal edge per participant) and
    scenario steps (one ParticipatesIn edge from actor role to activity).
    Edges touching an unmapped endpoint are dropped and reported.

    Refuses to run while the plan has error-severity diagnostics.
    """
    errors = [d for d in validate_plan(plan) if d.severity is Severity.ERROR]
    if errors:
        raise ValidationGate(
            f"plan {plan.plan_id!r} has {len(errors)} error diagnostic(s); "
            f"first: {errors[0].rule_id} at {errors[0].element.path}"
        )

    active = active_mappings(mappings)
    units: list[KnowledgeUnit] = []
    skipped: list[ElementRef] = []
    for ref, stereotype, description in enumerate_elements(plan):
        if stereotype is None:
            continue
        record = active.get(ref.path)
        if record is None:
            skipped.append(ref)
            continue
        units.append(
            KnowledgeUnit(
                unit_id=unit_id_for(ref.path),
                element=ref,
                phase=ref.phase,
                concept_name=record.concept_name,
                name=ref.element_id,
                description=description,
                source_model=_SOURCE_MODEL_BY_KIND[ref.kind],
            )
        )

    unit_ids = {unit.unit_id for unit in units}
    edges: list[KnowledgeEdge] = []
    seen_edges: set[tuple[str, str, RelationKind]] = set()
    skipped_edges: list[str] = []

    def emit(
        from_path: str, to_path: str, relation: RelationKind, provenance: ElementRef
    ) -> None:
        from_id, to_id = unit_id_for(from_path), unit_id_for(to_path)
        if relation is RelationKind.IS_PEER and from_id > to_id:
            from_id, to_id = to_id, from_id
            from_path, to_path = to_path, from_path
        missing = [p for p, u in ((from_path, from_id), (to_path, to_id)) if u not in unit_ids]
        if missing:
            skipped_edges.append(
                f"{relation.value} from {provenance.path}: unmapped endpoint(s) "
                + ", ".join(missing)
            )
            return
        key = (from_id, to_id, relation)
        if key in seen_edges:
            return
        seen_edges.add(key)
        edges.append(KnowledgeEdge(from_id, to_id, relation, provenance))

    for phase, models in plan.phases_in_order():

        def path(kind: ElementKind, element_id: str) -> str:
            return ElementRef(plan.plan_id, phase, kind, element_id).path

        for relation in models.organisation:
            provenance = org_relation_ref(plan.plan_id, phase, relation)
            left = path(ElementKind.ROLE, relation.left)
            right = path(ElementKind.ROLE, relation.right)
            if relation.kind is OrgKind.PEER:
                emit(left, right, RelationKind.IS_PEER, provenance)
            else:
                emit(left, right, RelationKind.CONTROLS, provenance)
        for interaction in models.interactions:
            provenance = ElementRef(
                plan.plan_id, phase, ElementKind.INTERACTION, interaction.interaction_id
            )
            goal_path = path(ElementKind.GOAL, interaction.goal_id)
            for participant in interaction.participants:
                emit(
                    path(ElementKind.ROLE, participant),
                    goal_path,
                    RelationKind.ROLE_PURSUE_GOAL,
                    provenance,
                )
        for scenario in models.scenarios:
            provenance = ElementRef(
                plan.plan_id, phase, ElementKind.SCENARIO, scenario.scenario_id
            )
            for step in scenario.steps:
                emit(
                    path(ElementKind.ROLE, step.actor_role_id),
                    path(ElementKind.ACTIVITY, step.activity_id),
                    RelationKind.PARTICIPATES_IN,
                    provenance,
                )

    return TransferResult(
        units=tuple(units),
        edges=tuple(edges),
        skipped=tuple(skipped),
        skipped_edges=tuple(skipped_edges),
    )


@dataclass(frozen=True)
class BatchEntry:
    line: int
    element_path: str
    concept_name: str
    mapper: str


class MappingFileError(DmkfError):
    """Raised when a batch mapping file is malformed; carries all problems."""

    def __init__(self, problems: list[str]):
        super().__init__(f"{len(problems)} mapping file problem(s); first: {problems[0]}")
        self.problems = tuple(problems)


def parse_mapping_file(text: str) -> list[BatchEntry]:
    """Parse the batch format: ``map <path> -> <Concept> by <STRING mapper>``."""
    from .records import RecordSyntaxError, scan_fields

    entries: list[BatchEntry] = []
    problems: list[str] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        try:
            fields = scan_fields(line)
        except RecordSyntaxError as exc:
            problems.append(f"line {line_no}: {exc}")
            continue
        if not fields:
            continue
        values = [f.value for f in fields]
        if (
            len(fields) != 6
            or values[0] != "map"
            or values[2] != "->"
            or values[4] != "by"
            or not fields[5].quoted
            or fields[1].quoted
            or fields[3].quoted
        ):
            problems.append(
                f"line {line_no}: expected 'map <element-path> -> <Concept> by \"mapper\"'"
            )
            continue
        entries.append(
            BatchEntry(
                line=line_no, element_path=values[1], concept_name=values[3], mapper=values[5]
            )
        )
    if problems:
        raise MappingFileError(problems)
    return entries

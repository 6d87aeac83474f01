"""Domain model for agent-oriented disaster management plans.

A plan (the M1 layer) groups seven model templates per disaster management
phase: goals, roles, organisation relations, interactions, environment
entities, agents and scenarios. All values are immutable after construction
and safe to share between threads; identifiers are case-sensitive tokens and
descriptions are opaque text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Phase(Enum):
    """The four disaster management phases. Tags, never an execution order."""

    PREVENTION = "Prevention"
    PREPAREDNESS = "Preparedness"
    RESPONSE = "Response"
    RECOVERY = "Recovery"


PHASE_INDEX = {phase: index for index, phase in enumerate(Phase)}
PHASE_BY_NAME = {phase.value: phase for phase in Phase}


class Stereotype(Enum):
    """Agent-oriented annotation tags carried by metamodel concepts."""

    GOAL = "Goal"
    ROLE = "Role"
    AGENT = "Agent"
    ACTIVITY = "Activity"
    EVENT = "Event"
    ENVIRONMENT_ENTITY = "EnvironmentEntity"


STEREOTYPE_BY_NAME = {s.value: s for s in Stereotype}


class RelationKind(Enum):
    """Typed relationships between knowledge units."""

    IS_PEER = "isPeer"
    CONTROLS = "Controls"
    IS_CONTROLLED_BY = "isControlledBy"
    ROLE_PURSUE_GOAL = "rolePursueGoal"
    PARTICIPATES_IN = "ParticipatesIn"
    INVOLVES = "Involves"


RELATION_BY_NAME = {r.value: r for r in RelationKind}

#: Stored relation -> inverse derived at query time. isPeer is symmetric and
#: stored once with normalized endpoints; the derived kinds are never stored.
INVERSE_RELATION = {
    RelationKind.CONTROLS: RelationKind.IS_CONTROLLED_BY,
    RelationKind.PARTICIPATES_IN: RelationKind.INVOLVES,
}


class OrgKind(Enum):
    """Shape of an organisation relation between two roles."""

    PEER = "peer"
    CONTROLS = "controls"


class StepMode(Enum):
    """Scheduling condition of a scenario step."""

    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"
    INTERLEAVED = "interleaved"


STEP_MODE_BY_NAME = {m.value: m for m in StepMode}


@dataclass(frozen=True)
class SourceSpan:
    """Half-open byte range in the source text, plus 1-based line/column."""

    start: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"span start {self.start} exceeds end {self.end}")


def _span_field():
    return field(default=None, compare=False, repr=False)


def _require_token(value: str, what: str) -> None:
    if not value:
        raise ValueError(f"{what} must be a non-empty token")
    if "/" in value:
        raise ValueError(f"{what} may not contain '/': {value!r}")


@dataclass(frozen=True)
class GoalNode:
    """A goal with nested subgoals and the roles needed to pursue it."""

    goal_id: str
    description: str
    subgoals: tuple[GoalNode, ...] = ()
    role_ids: tuple[str, ...] = ()
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        _require_token(self.goal_id, "goal_id")


@dataclass(frozen=True)
class Responsibility:
    text: str
    goal_id: str


@dataclass(frozen=True)
class RoleDef:
    """A role, its responsibilities (each tied to one goal) and constraints."""

    role_id: str
    description: str
    responsibilities: tuple[Responsibility, ...] = ()
    constraints: tuple[str, ...] = ()
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        _require_token(self.role_id, "role_id")


@dataclass(frozen=True)
class OrgRelation:
    """A peer or controls relation between two roles.

    Peer relations are normalized so that ``left < right`` lexicographically;
    the constructor swaps endpoints when needed. Endpoints must differ.
    """

    kind: OrgKind
    left: str
    right: str
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        _require_token(self.left, "left role")
        _require_token(self.right, "right role")
        if self.left == self.right:
            raise ValueError(f"organisation relation endpoints must differ: {self.left!r}")
        if self.kind is OrgKind.PEER and self.left > self.right:
            swapped_left, swapped_right = self.right, self.left
            object.__setattr__(self, "left", swapped_left)
            object.__setattr__(self, "right", swapped_right)


@dataclass(frozen=True)
class Interaction:
    """Roles cooperating towards one goal (at least two participants)."""

    interaction_id: str
    goal_id: str
    participants: tuple[str, ...]
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        _require_token(self.interaction_id, "interaction_id")
        if len(self.participants) < 2:
            raise ValueError(f"interaction {self.interaction_id!r} needs >= 2 participants")
        if len(set(self.participants)) != len(self.participants):
            raise ValueError(f"interaction {self.interaction_id!r} has duplicate participants")


@dataclass(frozen=True)
class EnvEntity:
    """A resource or supporting system in the environment model."""

    entity_id: str
    description: str = ""
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        _require_token(self.entity_id, "entity_id")


@dataclass(frozen=True)
class TriggerDef:
    trigger_id: str
    description: str


@dataclass(frozen=True)
class ActivityDef:
    activity_id: str
    description: str


@dataclass(frozen=True)
class AgentDef:
    """An agent type: the roles it plays, its triggers and its activities."""

    agent_id: str
    description: str
    plays: tuple[str, ...]
    triggers: tuple[TriggerDef, ...] = ()
    activities: tuple[ActivityDef, ...] = ()
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        _require_token(self.agent_id, "agent_id")
        if not self.plays:
            raise ValueError(f"agent {self.agent_id!r} must play at least one role")


@dataclass(frozen=True)
class ScenarioStep:
    """One activity in a scenario: actor role, resources used and mode."""

    activity_id: str
    actor_role_id: str
    resource_ids: tuple[str, ...] = ()
    mode: StepMode = StepMode.SEQUENTIAL
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class Scenario:
    """Ordered steps achieving a goal, framed by pre/post conditions."""

    scenario_id: str
    goal_id: str
    precondition: str
    postcondition: str
    steps: tuple[ScenarioStep, ...]
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        _require_token(self.scenario_id, "scenario_id")
        if not self.steps:
            raise ValueError(f"scenario {self.scenario_id!r} needs at least one step")


def walk_goals(goals: tuple[GoalNode, ...]):
    """Yield every goal node of a forest in declaration (preorder) order."""
    for goal in goals:
        yield goal
        yield from walk_goals(goal.subgoals)


@dataclass(frozen=True)
class PhaseModels:
    """The seven model templates of one phase.

    Identifiers are unique per element kind within the phase, except that
    several agents may declare the same activity or trigger: those share one
    identity across the phase and are deduplicated during enumeration.
    """

    goals: tuple[GoalNode, ...] = ()
    roles: tuple[RoleDef, ...] = ()
    organisation: tuple[OrgRelation, ...] = ()
    interactions: tuple[Interaction, ...] = ()
    environment: tuple[EnvEntity, ...] = ()
    agents: tuple[AgentDef, ...] = ()
    scenarios: tuple[Scenario, ...] = ()

    def __post_init__(self):
        self._check_unique("goal", [g.goal_id for g in walk_goals(self.goals)])
        self._check_unique("role", [r.role_id for r in self.roles])
        self._check_unique("interaction", [i.interaction_id for i in self.interactions])
        self._check_unique("resource", [e.entity_id for e in self.environment])
        self._check_unique("agent", [a.agent_id for a in self.agents])
        self._check_unique("scenario", [s.scenario_id for s in self.scenarios])
        self._check_unique(
            "organisation relation",
            [f"{r.left} {r.kind.value} {r.right}" for r in self.organisation],
        )
        for agent in self.agents:
            self._check_unique(
                f"trigger of agent {agent.agent_id}", [t.trigger_id for t in agent.triggers]
            )
            self._check_unique(
                f"activity of agent {agent.agent_id}", [a.activity_id for a in agent.activities]
            )

    @staticmethod
    def _check_unique(kind: str, ids: list[str]) -> None:
        seen = set()
        for element_id in ids:
            if element_id in seen:
                raise ValueError(f"duplicate {kind} identifier {element_id!r}")
            seen.add(element_id)


@dataclass(frozen=True)
class Plan:
    """A disaster management plan: models grouped per populated phase."""

    plan_id: str
    title: str
    phases: dict[Phase, PhaseModels]

    def __post_init__(self):
        _require_token(self.plan_id, "plan_id")
        if not self.phases:
            raise ValueError(f"plan {self.plan_id!r} must populate at least one phase")

    def phases_in_order(self) -> list[tuple[Phase, PhaseModels]]:
        return [(p, self.phases[p]) for p in Phase if p in self.phases]


class ElementKind(Enum):
    """Addressable kinds of plan elements.

    The first eight participate in enumeration and mapping; ``organisation``
    exists only to give organisation relations an address for edge provenance
    and diagnostics (the relations themselves carry no identifier).
    """

    GOAL = "goal"
    ROLE = "role"
    AGENT = "agent"
    ACTIVITY = "activity"
    TRIGGER = "trigger"
    RESOURCE = "resource"
    INTERACTION = "interaction"
    SCENARIO = "scenario"
    ORGANISATION = "organisation"


KIND_BY_NAME = {k.value: k for k in ElementKind}

#: Enumeration order of mappable/addressable kinds within a phase.
ENUMERATION_KIND_ORDER = (
    ElementKind.GOAL,
    ElementKind.ROLE,
    ElementKind.AGENT,
    ElementKind.ACTIVITY,
    ElementKind.TRIGGER,
    ElementKind.RESOURCE,
    ElementKind.INTERACTION,
    ElementKind.SCENARIO,
)

_STEREOTYPE_OF_KIND = {
    ElementKind.GOAL: Stereotype.GOAL,
    ElementKind.ROLE: Stereotype.ROLE,
    ElementKind.AGENT: Stereotype.AGENT,
    ElementKind.ACTIVITY: Stereotype.ACTIVITY,
    ElementKind.TRIGGER: Stereotype.EVENT,
    ElementKind.RESOURCE: Stereotype.ENVIRONMENT_ENTITY,
    ElementKind.INTERACTION: None,
    ElementKind.SCENARIO: None,
}


def stereotype_of(kind: ElementKind) -> Stereotype | None:
    """Annotation family an element kind maps to, or None.

    Interactions and scenarios return None: they contribute relationships and
    groupings between other elements rather than concept-mapped elements.
    """
    return _STEREOTYPE_OF_KIND.get(kind)


@dataclass(frozen=True)
class ElementRef:
    """Canonical address of a plan element: ``plan_id/phase/kind/element_id``.

    Tokens may not contain ``/``, which makes the rendered path injective.
    """

    plan_id: str
    phase: Phase
    kind: ElementKind
    element_id: str

    def __post_init__(self):
        _require_token(self.plan_id, "plan_id")
        _require_token(self.element_id, "element_id")

    @property
    def path(self) -> str:
        return f"{self.plan_id}/{self.phase.value}/{self.kind.value}/{self.element_id}"

    def __str__(self) -> str:
        return self.path

    @classmethod
    def parse(cls, path: str) -> ElementRef:
        parts = path.split("/")
        if len(parts) != 4:
            raise ValueError(f"element path needs 4 '/'-separated parts: {path!r}")
        plan_id, phase_name, kind_name, element_id = parts
        if phase_name not in PHASE_BY_NAME:
            raise ValueError(f"unknown phase {phase_name!r} in {path!r}")
        if kind_name not in KIND_BY_NAME:
            raise ValueError(f"unknown element kind {kind_name!r} in {path!r}")
        return cls(plan_id, PHASE_BY_NAME[phase_name], KIND_BY_NAME[kind_name], element_id)


def org_relation_ref(plan_id: str, phase: Phase, relation: OrgRelation) -> ElementRef:
    """Synthesized address for an organisation relation (used as provenance)."""
    element_id = f"{relation.left}~{relation.kind.value}~{relation.right}"
    return ElementRef(plan_id, phase, ElementKind.ORGANISATION, element_id)


def enumerate_elements(plan: Plan) -> list[tuple[ElementRef, Stereotype | None, str]]:
    """List every addressable element of the plan, deterministically.

    Phases come in enum order and kinds in :data:`ENUMERATION_KIND_ORDER`;
    within one kind, source declaration order is preserved. Activities and
    triggers declared by several agents appear once, keyed by identifier,
    with the first declaration supplying the description. Interactions and
    scenarios are listed with an empty description and no stereotype.
    """
    out: list[tuple[ElementRef, Stereotype | None, str]] = []
    for phase, models in plan.phases_in_order():

        def ref(kind: ElementKind, element_id: str) -> ElementRef:
            return ElementRef(plan.plan_id, phase, kind, element_id)

        for goal in walk_goals(models.goals):
            out.append((ref(ElementKind.GOAL, goal.goal_id), Stereotype.GOAL, goal.description))
        for role in models.roles:
            out.append((ref(ElementKind.ROLE, role.role_id), Stereotype.ROLE, role.description))
        for agent in models.agents:
            out.append((ref(ElementKind.AGENT, agent.agent_id), Stereotype.AGENT, agent.description))

        seen_activities: set[str] = set()
        for agent in models.agents:
            for activity in agent.activities:
                if activity.activity_id in seen_activities:
                    continue
                seen_activities.add(activity.activity_id)
                out.append(
                    (
                        ref(ElementKind.ACTIVITY, activity.activity_id),
                        Stereotype.ACTIVITY,
                        activity.description,
                    )
                )

        seen_triggers: set[str] = set()
        for agent in models.agents:
            for trigger in agent.triggers:
                if trigger.trigger_id in seen_triggers:
                    continue
                seen_triggers.add(trigger.trigger_id)
                out.append(
                    (
                        ref(ElementKind.TRIGGER, trigger.trigger_id),
                        Stereotype.EVENT,
                        trigger.description,
                    )
                )

        for entity in models.environment:
            out.append(
                (
                    ref(ElementKind.RESOURCE, entity.entity_id),
                    Stereotype.ENVIRONMENT_ENTITY,
                    entity.description,
                )
            )
        for interaction in models.interactions:
            out.append((ref(ElementKind.INTERACTION, interaction.interaction_id), None, ""))
        for scenario in models.scenarios:
            out.append((ref(ElementKind.SCENARIO, scenario.scenario_id), None, ""))
    return out

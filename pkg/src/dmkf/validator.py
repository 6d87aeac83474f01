"""Cross-reference consistency rules over a parsed plan.

The seven model templates of a phase reference each other by identifier;
these rules check that every such connection resolves. All rules operate
per phase (the DSL has no cross-phase references) and the diagnostic list
is deterministic: ordered by (phase, rule id, element path).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import (
    ElementKind,
    ElementRef,
    OrgKind,
    PHASE_INDEX,
    Phase,
    PhaseModels,
    Plan,
    org_relation_ref,
    walk_goals,
)


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One rule finding, addressed to the closest responsible element."""

    rule_id: str
    severity: Severity
    element: ElementRef
    message: str


_RULES: tuple[tuple[str, Severity, str], ...] = (
    ("R1", Severity.ERROR, "every agent activity appears as some scenario step's activity"),
    ("R2", Severity.ERROR, "every scenario achieves an existing goal or subgoal"),
    ("R3", Severity.ERROR, "every responsibility names an existing goal"),
    ("R4", Severity.ERROR, "every scenario step resource is declared in the environment model"),
    (
        "R5",
        Severity.ERROR,
        "organisation relations reference declared roles and the controls digraph is acyclic",
    ),
    (
        "R6",
        Severity.ERROR,
        "interaction participants are declared roles and the pursued goal exists",
    ),
    ("R7", Severity.ERROR, "every role referenced by a goal is a declared role"),
    ("R8", Severity.ERROR, "every agent plays only declared roles"),
    (
        "R9",
        Severity.WARNING,
        "scenario pre/post conditions are non-empty and each step's actor plays a role "
        "of some agent declaring the stepped activity",
    ),
)


def rule_table() -> list[tuple[str, Severity, str]]:
    """The fixed rule catalogue: (rule id, severity, description)."""
    return list(_RULES)


def _controls_cycles(models: PhaseModels) -> list[list[str]]:
    """Nontrivial strongly connected components of the controls digraph.

    Returns one representative cycle per component, anchored (and starting)
    at the component's lexicographically smallest node.
    """
    graph: dict[str, set[str]] = {}
    for relation in models.organisation:
        if relation.kind is OrgKind.CONTROLS:
            graph.setdefault(relation.left, set()).add(relation.right)
            graph.setdefault(relation.right, set())

    # Tarjan's algorithm, iterative to keep arbitrary inputs stack-safe.
    index_of: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    components: list[list[str]] = []

    for root in sorted(graph):
        if root in index_of:
            continue
        work: list[tuple[str, list[str], int]] = [(root, sorted(graph[root]), 0)]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, successors, next_i = work.pop()
            advanced = False
            for i in range(next_i, len(successors)):
                succ = successors[i]
                if succ not in index_of:
                    work.append((node, successors, i + 1))
                    index_of[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, sorted(graph[succ]), 0))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index_of[succ])
            if advanced:
                continue
            if low[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1:
                    components.append(sorted(component))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    cycles: list[list[str]] = []
    for component in sorted(components, key=lambda c: c[0]):
        members = set(component)
        anchor = component[0]
        # Shortest cycle through the anchor: BFS back to it from each successor.
        cycle: list[str] | None = None
        for first in sorted(n for n in graph[anchor] if n in members):
            parent: dict[str, str | None] = {first: None}
            queue = [first]
            while queue and anchor not in parent:
                current = queue.pop(0)
                for succ in sorted(graph[current]):
                    if succ in members and succ not in parent:
                        parent[succ] = current
                        queue.append(succ)
            if anchor in parent:
                hops = []
                node: str | None = parent[anchor]
                while node is not None:
                    hops.append(node)
                    node = parent[node]
                cycle = [anchor] + hops[::-1]
                break
        cycles.append(cycle if cycle is not None else [anchor])
    return cycles


def _validate_phase(plan_id: str, phase: Phase, models: PhaseModels) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    def ref(kind: ElementKind, element_id: str) -> ElementRef:
        return ElementRef(plan_id, phase, kind, element_id)

    def add(rule: str, element: ElementRef, message: str) -> None:
        severity = next(sev for rid, sev, _ in _RULES if rid == rule)
        diags.append(Diagnostic(rule, severity, element, message))

    goal_ids = {g.goal_id for g in walk_goals(models.goals)}
    role_ids = {r.role_id for r in models.roles}
    entity_ids = {e.entity_id for e in models.environment}
    step_activity_ids = {
        step.activity_id for scenario in models.scenarios for step in scenario.steps
    }
    roles_declaring_activity: dict[str, set[str]] = {}
    seen_activities: set[str] = set()
    activity_order: list[str] = []
    for agent in models.agents:
        for activity in agent.activities:
            roles_declaring_activity.setdefault(activity.activity_id, set()).update(agent.plays)
            if activity.activity_id not in seen_activities:
                seen_activities.add(activity.activity_id)
                activity_order.append(activity.activity_id)

    # R1: agent activities must be stepped in some scenario.
    for activity_id in activity_order:
        if activity_id not in step_activity_ids:
            add(
                "R1",
                ref(ElementKind.ACTIVITY, activity_id),
                f"activity {activity_id!r} does not appear in any scenario step",
            )

    # R2: scenario goals exist.
    for scenario in models.scenarios:
        if scenario.goal_id not in goal_ids:
            add(
                "R2",
                ref(ElementKind.SCENARIO, scenario.scenario_id),
                f"scenario achieves unknown goal {scenario.goal_id!r}",
            )

    # R3: responsibilities point at existing goals.
    for role in models.roles:
        for responsibility in role.responsibilities:
            if responsibility.goal_id not in goal_ids:
                add(
                    "R3",
                    ref(ElementKind.ROLE, role.role_id),
                    f"responsibility {responsibility.text!r} references unknown goal "
                    f"{responsibility.goal_id!r}",
                )

    # R4: step resources are declared environment entities.
    for scenario in models.scenarios:
        for step in scenario.steps:
            for resource_id in step.resource_ids:
                if resource_id not in entity_ids:
                    add(
                        "R4",
                        ref(ElementKind.SCENARIO, scenario.scenario_id),
                        f"step {step.activity_id!r} uses undeclared resource {resource_id!r}",
                    )

    # R5: organisation endpoints declared; controls digraph acyclic.
    for relation in models.organisation:
        for endpoint in (relation.left, relation.right):
            if endpoint not in role_ids:
                add(
                    "R5",
                    org_relation_ref(plan_id, phase, relation),
                    f"organisation relation references undeclared role {endpoint!r}",
                )
    for cycle in _controls_cycles(models):
        rendered = " -> ".join(cycle + [cycle[0]])
        add(
            "R5",
            ref(ElementKind.ROLE, cycle[0]),
            f"controls cycle: {rendered}",
        )

    # R6: interaction participants and goal exist.
    for interaction in models.interactions:
        for participant in interaction.participants:
            if participant not in role_ids:
                add(
                    "R6",
                    ref(ElementKind.INTERACTION, interaction.interaction_id),
                    f"participant {participant!r} is not a declared role",
                )
        if interaction.goal_id not in goal_ids:
            add(
                "R6",
                ref(ElementKind.INTERACTION, interaction.interaction_id),
                f"interaction pursues unknown goal {interaction.goal_id!r}",
            )

    # R7: goals reference declared roles.
    for goal in walk_goals(models.goals):
        for role_id in goal.role_ids:
            if role_id not in role_ids:
                add(
                    "R7",
                    ref(ElementKind.GOAL, goal.goal_id),
                    f"goal references undeclared role {role_id!r}",
                )

    # R8: agents play declared roles.
    for agent in models.agents:
        for role_id in agent.plays:
            if role_id not in role_ids:
                add(
                    "R8",
                    ref(ElementKind.AGENT, agent.agent_id),
                    f"agent plays undeclared role {role_id!r}",
                )

    # R9 (warning): empty pre/post conditions; step actor consistency.
    for scenario in models.scenarios:
        scenario_ref = ref(ElementKind.SCENARIO, scenario.scenario_id)
        if not scenario.precondition:
            add("R9", scenario_ref, "scenario precondition is empty")
        if not scenario.postcondition:
            add("R9", scenario_ref, "scenario postcondition is empty")
        for step in scenario.steps:
            declaring_roles = roles_declaring_activity.get(step.activity_id, set())
            if step.actor_role_id not in declaring_roles:
                add(
                    "R9",
                    scenario_ref,
                    f"step {step.activity_id!r} is performed by {step.actor_role_id!r}, "
                    "which no agent declaring that activity plays",
                )
    return diags


def validate_plan(plan: Plan) -> list[Diagnostic]:
    """Run every rule over every populated phase.

    Returns a deterministic list ordered by (phase, rule id, element path);
    empty iff all rules pass. When no error-severity diagnostic is present,
    every cross-reference that knowledge transfer relies on resolves.
    """
    diags: list[Diagnostic] = []
    for phase, models in plan.phases_in_order():
        diags.extend(_validate_phase(plan.plan_id, phase, models))
    diags.sort(key=lambda d: (PHASE_INDEX[d.element.phase], d.rule_id, d.element.path))
    return diags

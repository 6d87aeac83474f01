"""Independent brute-force re-implementation of the consistency rules.

Used as an oracle: exhaustively enumerates every cross-reference with plain
loops and finds controls cycles via transitive-closure reachability instead
of the production SCC algorithm. Returns (rule, severity, path) triples.
"""

from __future__ import annotations

import random

from dmkf.model import (
    ActivityDef,
    AgentDef,
    EnvEntity,
    GoalNode,
    Interaction,
    OrgKind,
    OrgRelation,
    Phase,
    PhaseModels,
    Plan,
    Responsibility,
    RoleDef,
    Scenario,
    ScenarioStep,
    StepMode,
    TriggerDef,
    org_relation_ref,
)

Triple = tuple[str, str, str]


def _all_goal_ids(goals) -> list[str]:
    out = []
    stack = list(goals)
    while stack:
        goal = stack.pop(0)
        out.append(goal.goal_id)
        stack = list(goal.subgoals) + stack
    return out


def _goal_nodes(goals):
    stack = list(goals)
    while stack:
        goal = stack.pop(0)
        yield goal
        stack = list(goal.subgoals) + stack


def brute_force_diagnostics(plan: Plan) -> list[Triple]:
    found: list[Triple] = []

    def path(phase, kind, element_id):
        return f"{plan.plan_id}/{phase.value}/{kind}/{element_id}"

    for phase in list(Phase):
        if phase not in plan.phases:
            continue
        pm = plan.phases[phase]
        goal_ids = _all_goal_ids(pm.goals)
        role_ids = [r.role_id for r in pm.roles]
        entity_ids = [e.entity_id for e in pm.environment]
        stepped = []
        for scenario in pm.scenarios:
            for step in scenario.steps:
                stepped.append(step.activity_id)

        # R1
        listed = []
        for agent in pm.agents:
            for activity in agent.activities:
                if activity.activity_id not in listed:
                    listed.append(activity.activity_id)
        for activity_id in listed:
            if activity_id not in stepped:
                found.append(("R1", "error", path(phase, "activity", activity_id)))

        # R2
        for scenario in pm.scenarios:
            if scenario.goal_id not in goal_ids:
                found.append(("R2", "error", path(phase, "scenario", scenario.scenario_id)))

        # R3
        for role in pm.roles:
            for responsibility in role.responsibilities:
                if responsibility.goal_id not in goal_ids:
                    found.append(("R3", "error", path(phase, "role", role.role_id)))

        # R4
        for scenario in pm.scenarios:
            for step in scenario.steps:
                for resource_id in step.resource_ids:
                    if resource_id not in entity_ids:
                        found.append(
                            ("R4", "error", path(phase, "scenario", scenario.scenario_id))
                        )

        # R5: undeclared endpoints
        for relation in pm.organisation:
            for endpoint in (relation.left, relation.right):
                if endpoint not in role_ids:
                    found.append(
                        ("R5", "error", org_relation_ref(plan.plan_id, phase, relation).path)
                    )
        # R5: cycles by reachability closure
        nodes = sorted(
            {r.left for r in pm.organisation if r.kind is OrgKind.CONTROLS}
            | {r.right for r in pm.organisation if r.kind is OrgKind.CONTROLS}
        )
        reach = {
            (r.left, r.right) for r in pm.organisation if r.kind is OrgKind.CONTROLS
        }
        changed = True
        while changed:
            changed = False
            for a in nodes:
                for b in nodes:
                    if (a, b) in reach:
                        continue
                    if any((a, c) in reach and (c, b) in reach for c in nodes):
                        reach.add((a, b))
                        changed = True
        component_of: dict[str, frozenset[str]] = {}
        for a in nodes:
            members = frozenset(
                {a}
                | {b for b in nodes if (a, b) in reach and (b, a) in reach}
            )
            component_of[a] = members
        seen_components = set()
        for a in nodes:
            component = component_of[a]
            if len(component) > 1 and component not in seen_components:
                seen_components.add(component)
                found.append(("R5", "error", path(phase, "role", min(component))))

        # R6
        for interaction in pm.interactions:
            for participant in interaction.participants:
                if participant not in role_ids:
                    found.append(
                        ("R6", "error", path(phase, "interaction", interaction.interaction_id))
                    )
            if interaction.goal_id not in goal_ids:
                found.append(
                    ("R6", "error", path(phase, "interaction", interaction.interaction_id))
                )

        # R7
        for goal in _goal_nodes(pm.goals):
            for role_id in goal.role_ids:
                if role_id not in role_ids:
                    found.append(("R7", "error", path(phase, "goal", goal.goal_id)))

        # R8
        for agent in pm.agents:
            for role_id in agent.plays:
                if role_id not in role_ids:
                    found.append(("R8", "error", path(phase, "agent", agent.agent_id)))

        # R9
        for scenario in pm.scenarios:
            if scenario.precondition == "":
                found.append(("R9", "warning", path(phase, "scenario", scenario.scenario_id)))
            if scenario.postcondition == "":
                found.append(("R9", "warning", path(phase, "scenario", scenario.scenario_id)))
            for step in scenario.steps:
                playable = []
                for agent in pm.agents:
                    if any(a.activity_id == step.activity_id for a in agent.activities):
                        playable.extend(agent.plays)
                if step.actor_role_id not in playable:
                    found.append(
                        ("R9", "warning", path(phase, "scenario", scenario.scenario_id))
                    )
    return sorted(found)


def random_plan(rng: random.Random) -> Plan:
    """A structurally valid random plan with deliberately flaky references."""
    pool = [f"E{i}" for i in range(12)]

    def some(max_count, population=None):
        population = population if population is not None else pool
        count = rng.randint(0, max_count)
        return rng.sample(population, min(count, len(population)))

    def pick(population=None):
        return rng.choice(population if population is not None else pool)

    phases = rng.sample(list(Phase), rng.randint(1, 2))
    models = {}
    for phase in phases:
        goal_ids = some(6)
        goals: list[GoalNode] = []
        for goal_id in goal_ids:
            node = GoalNode(
                goal_id=goal_id,
                description=f"goal {goal_id}",
                role_ids=tuple(rng.choices(pool, k=rng.randint(0, 2))),
            )
            if goals and rng.random() < 0.4:
                parent = rng.randrange(len(goals))
                goals[parent] = GoalNode(
                    goal_id=goals[parent].goal_id,
                    description=goals[parent].description,
                    subgoals=goals[parent].subgoals + (node,),
                    role_ids=goals[parent].role_ids,
                )
            else:
                goals.append(node)
        roles = tuple(
            RoleDef(
                role_id=role_id,
                description=f"role {role_id}",
                responsibilities=tuple(
                    Responsibility(f"duty {i}", pick()) for i in range(rng.randint(0, 2))
                ),
            )
            for role_id in some(6)
        )
        relations = []
        seen = set()
        for _ in range(rng.randint(0, 6)):
            left, right = rng.sample(pool, 2)
            kind = rng.choice(list(OrgKind))
            relation = OrgRelation(kind=kind, left=left, right=right)
            key = (relation.kind, relation.left, relation.right)
            if key not in seen:
                seen.add(key)
                relations.append(relation)
        interactions = tuple(
            Interaction(
                interaction_id=f"I{i}",
                goal_id=pick(),
                participants=tuple(rng.sample(pool, rng.randint(2, 3))),
            )
            for i in range(rng.randint(0, 2))
        )
        environment = tuple(
            EnvEntity(entity_id=entity_id, description="res") for entity_id in some(4)
        )
        agent_list = []
        for i in range(rng.randint(0, 3)):
            agent_list.append(
                AgentDef(
                    agent_id=f"A{i}",
                    description="agent",
                    plays=tuple(rng.sample(pool, rng.randint(1, 2))),
                    triggers=tuple(
                        TriggerDef(t, "trigger") for t in some(2)
                    ),
                    activities=tuple(
                        ActivityDef(a, "activity") for a in some(3)
                    ),
                )
            )
        scenario_list = tuple(
            Scenario(
                scenario_id=f"S{i}",
                goal_id=pick(),
                precondition=rng.choice(["", "ready"]),
                postcondition=rng.choice(["", "done"]),
                steps=tuple(
                    ScenarioStep(
                        activity_id=pick(),
                        actor_role_id=pick(),
                        resource_ids=tuple(rng.choices(pool, k=rng.randint(0, 2))),
                        mode=rng.choice(list(StepMode)),
                    )
                    for _ in range(rng.randint(1, 3))
                ),
            )
            for i in range(rng.randint(0, 2))
        )
        models[phase] = PhaseModels(
            goals=tuple(goals),
            roles=roles,
            organisation=tuple(relations),
            interactions=interactions,
            environment=environment,
            agents=tuple(agent_list),
            scenarios=scenario_list,
        )
    return Plan(plan_id="P", title="random plan", phases=models)

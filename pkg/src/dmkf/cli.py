"""Command-line interface.

Subcommands: parse, render, validate, rules, registry-check, candidates,
map-batch, transfer, query, export, serve, fixtures. Exit codes: 0 ok,
1 validation errors, 2 usage error, 3 I/O or integrity error. Failures
print one machine-readable line: ``<ErrorClass>: <human text>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .dsl import PlanParseError, parse_plan, render_plan
from .errors import DmkfError, NoCandidates, UsageError
from .fixtures import FIXTURES, fixture_path
from .mapping import MappingFileError, parse_mapping_file, SOURCE_MODEL_BY_NAME
from .model import PHASE_BY_NAME, Plan, RELATION_BY_NAME
from .registry import RegistryLoadError, load_registry
from .repository import QueryFilter, export_snapshot
from .validator import Severity, rule_table, validate_plan
from .workspace import Workspace


def _plan_to_dict(plan: Plan) -> dict:
    def goal(node):
        return {
            "goal_id": node.goal_id,
            "description": node.description,
            "role_ids": list(node.role_ids),
            "subgoals": [goal(s) for s in node.subgoals],
        }

    phases = {}
    for phase, models in plan.phases_in_order():
        phases[phase.value] = {
            "goals": [goal(g) for g in models.goals],
            "roles": [
                {
                    "role_id": r.role_id,
                    "description": r.description,
                    "responsibilities": [
                        {"text": resp.text, "goal_id": resp.goal_id}
                        for resp in r.responsibilities
                    ],
                    "constraints": list(r.constraints),
                }
                for r in models.roles
            ],
            "organisation": [
                {"kind": rel.kind.value, "left": rel.left, "right": rel.right}
                for rel in models.organisation
            ],
            "interactions": [
                {
                    "interaction_id": i.interaction_id,
                    "goal_id": i.goal_id,
                    "participants": list(i.participants),
                }
                for i in models.interactions
            ],
            "environment": [
                {"entity_id": e.entity_id, "description": e.description}
                for e in models.environment
            ],
            "agents": [
                {
                    "agent_id": a.agent_id,
                    "description": a.description,
                    "plays": list(a.plays),
                    "triggers": [
                        {"trigger_id": t.trigger_id, "description": t.description}
                        for t in a.triggers
                    ],
                    "activities": [
                        {"activity_id": act.activity_id, "description": act.description}
                        for act in a.activities
                    ],
                }
                for a in models.agents
            ],
            "scenarios": [
                {
                    "scenario_id": s.scenario_id,
                    "goal_id": s.goal_id,
                    "precondition": s.precondition,
                    "postcondition": s.postcondition,
                    "steps": [
                        {
                            "activity_id": st.activity_id,
                            "actor_role_id": st.actor_role_id,
                            "resource_ids": list(st.resource_ids),
                            "mode": st.mode.value,
                        }
                        for st in s.steps
                    ],
                }
                for s in models.scenarios
            ],
        }
    return {"plan_id": plan.plan_id, "title": plan.title, "phases": phases}


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _require(value, flag: str):
    if value is None or (isinstance(value, list) and not value):
        raise UsageError(f"this subcommand requires {flag}")
    return value


def _load_workspace(args, need_registry=True, need_plans=False) -> Workspace:
    if need_registry:
        _require(args.registry, "--registry")
    if need_plans:
        _require(args.plan, "--plan")
    clock = None
    at = getattr(args, "at", None)
    if at is not None:
        fixed = datetime.fromisoformat(at.replace("Z", "+00:00"))
        if fixed.tzinfo is None:
            fixed = fixed.replace(tzinfo=timezone.utc)
        clock = lambda: fixed  # noqa: E731
    return Workspace.load(
        registry_path=args.registry,
        plan_paths=args.plan or [],
        snapshot_path=getattr(args, "snapshot", None),
        clock=clock,
        force_registry=getattr(args, "force_registry", False),
    )


def cmd_parse(args) -> int:
    plan = parse_plan(_read(_require(args.plan, "--plan")[0]))
    print(json.dumps(_plan_to_dict(plan), indent=2))
    return 0


def cmd_render(args) -> int:
    for plan_file in _require(args.plan, "--plan"):
        sys.stdout.write(render_plan(parse_plan(_read(plan_file))))
    return 0


def cmd_validate(args) -> int:
    errors = warnings = 0
    for plan_file in _require(args.plan, "--plan"):
        plan = parse_plan(_read(plan_file))
        for diag in validate_plan(plan):
            print(f"{diag.rule_id} {diag.severity.value} {diag.element.path}: {diag.message}")
            if diag.severity is Severity.ERROR:
                errors += 1
            else:
                warnings += 1
    print(f"{errors} errors, {warnings} warnings")
    return 1 if errors else 0


def cmd_rules(args) -> int:
    for rule_id, severity, description in rule_table():
        print(f"{rule_id}\t{severity.value}\t{description}")
    return 0


def cmd_registry_check(args) -> int:
    registry = load_registry(_read(_require(args.registry, "--registry")))
    counts = registry.phase_counts()
    rendered = " ".join(f"{phase.value}={counts[phase]}" for phase in counts)
    print(f"ok: {len(registry.concepts)} concepts ({rendered})")
    return 0


def cmd_candidates(args) -> int:
    workspace = _load_workspace(args, need_plans=True)
    element = _require(args.element, "--element")
    if args.ranked:
        try:
            suggestions = workspace.ranked_suggestions(element)
        except NoCandidates:
            suggestions = []
        for suggestion in suggestions:
            print(f"{suggestion.concept.name}\t{suggestion.score:.6g}")
    else:
        for concept in workspace.candidate_concepts(element):
            print(concept.name)
    return 0


def cmd_map_batch(args) -> int:
    workspace = _load_workspace(args, need_plans=True)
    total = 0
    for map_file in args.mapfile:
        for entry in parse_mapping_file(_read(map_file)):
            record = workspace.commit(entry.element_path, entry.concept_name, entry.mapper)
            print(f"mapped {record.element.path} -> {record.concept_name}")
            total += 1
    print(f"{total} mappings recorded")
    return 0


def cmd_transfer(args) -> int:
    workspace = _load_workspace(args, need_plans=True)
    for plan_id, result in workspace.transfer_plans():
        print(
            f"plan {plan_id}: {len(result.units)} units, {len(result.edges)} edges, "
            f"{len(result.skipped)} skipped"
        )
        for ref in result.skipped:
            print(f"skipped {ref.path}")
        for warning in result.skipped_edges:
            print(f"skipped-edge {warning}")
    return 0


def cmd_query(args) -> int:
    from .repository import load_snapshot, query, query_edges

    snapshot = load_snapshot(_require(args.snapshot, "--snapshot"))
    if args.relation or args.unit:
        relation = None
        if args.relation:
            if args.relation not in RELATION_BY_NAME:
                raise UsageError(f"unknown relation {args.relation!r}")
            relation = RELATION_BY_NAME[args.relation]
        for edge in query_edges(snapshot, relation=relation, unit=args.unit):
            print(
                f"{edge.from_unit}\t{edge.to_unit}\t{edge.relation.value}\t{edge.provenance.path}"
            )
        return 0

    phase = None
    if args.phase:
        if args.phase not in PHASE_BY_NAME:
            raise UsageError(f"unknown phase {args.phase!r}")
        phase = PHASE_BY_NAME[args.phase]
    source_model = None
    if args.source_model:
        if args.source_model not in SOURCE_MODEL_BY_NAME:
            raise UsageError(f"unknown source model {args.source_model!r}")
        source_model = SOURCE_MODEL_BY_NAME[args.source_model]
    filt = QueryFilter(
        phase=phase,
        concept_name=args.concept,
        plan_id=args.plan_id,
        source_model=source_model,
    )
    for unit in query(snapshot, filt):
        print(
            f"{unit.element.path}\t{unit.concept_name}\t{unit.name}\t"
            f"{unit.description}\t{unit.source_model.value}"
        )
    return 0


def cmd_export(args) -> int:
    from .repository import load_snapshot

    snapshot = load_snapshot(_require(args.snapshot, "--snapshot"))
    sys.stdout.write(export_snapshot(snapshot))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    workspace = _load_workspace(args, need_plans=True)
    app = create_app(workspace, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_fixtures(args) -> int:
    if args.name:
        print(fixture_path(args.name))
        return 0
    for name in sorted(FIXTURES):
        print(f"{name}\t{fixture_path(name)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmkf",
        description="Convert agent-oriented disaster management plans into a "
        "concept-indexed knowledge repository.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *, registry=False, plans=False, snapshot=False):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        if registry:
            p.add_argument("--registry", metavar="FILE", help="registry file")
        if plans:
            p.add_argument(
                "--plan", metavar="FILE", action="append", help="plan file (repeatable)"
            )
        if snapshot:
            p.add_argument("--snapshot", metavar="FILE", help="snapshot file")
        return p

    add("parse", cmd_parse, "parse a plan and dump its structure as JSON", plans=True)
    add("render", cmd_render, "parse a plan and print its canonical DSL form", plans=True)
    add("validate", cmd_validate, "run the consistency rules over plans", plans=True)
    add("rules", cmd_rules, "print the consistency rule table")
    add("registry-check", cmd_registry_check, "load and verify a registry file", registry=True)

    p = add(
        "candidates",
        cmd_candidates,
        "list candidate concepts for one element",
        registry=True,
        plans=True,
    )
    p.add_argument("--element", metavar="PATH", help="element path plan/phase/kind/id")
    p.add_argument("--ranked", action="store_true", help="order by suggestion score")

    p = add(
        "map-batch",
        cmd_map_batch,
        "apply a batch mapping file",
        registry=True,
        plans=True,
        snapshot=True,
    )
    p.add_argument("mapfile", nargs="+", metavar="MAPFILE")
    p.add_argument("--at", metavar="ISO8601", help="fixed base timestamp for reproducible runs")
    p.add_argument(
        "--force-registry",
        action="store_true",
        help="accept a snapshot produced under a different registry",
    )

    p = add(
        "transfer",
        cmd_transfer,
        "transfer mapped elements into knowledge units and edges",
        registry=True,
        plans=True,
        snapshot=True,
    )
    p.add_argument(
        "--force-registry",
        action="store_true",
        help="accept a snapshot produced under a different registry",
    )

    p = add("query", cmd_query, "query stored units or edges", registry=True, plans=True, snapshot=True)
    p.add_argument("--concept", help="filter units by concept name")
    p.add_argument("--phase", help="filter units by phase")
    p.add_argument("--plan-id", help="filter units by plan identifier")
    p.add_argument("--source-model", help="filter units by source model")
    p.add_argument("--relation", help="edge query: relation kind (inverses derived)")
    p.add_argument("--unit", help="edge query: unit id filter")

    add("export", cmd_export, "print the canonical snapshot text", snapshot=True)

    p = add(
        "serve",
        cmd_serve,
        "serve the HTTP JSON API (and optionally the browser UI)",
        registry=True,
        plans=True,
        snapshot=True,
    )
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8645)
    p.add_argument("--frontend", metavar="DIR", help="built frontend directory to serve at /")

    p = add("fixtures", cmd_fixtures, "print paths of the bundled example files")
    p.add_argument("name", nargs="?", help="fixture name (omit to list all)")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PlanParseError as exc:
        print(f"{exc.error_class}: {exc}", file=sys.stderr)
        for error in exc.errors:
            print(f"  {error.message}", file=sys.stderr)
        return 1
    except RegistryLoadError as exc:
        print(f"{exc.error_class}: {exc}", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return 1
    except MappingFileError as exc:
        print(f"{exc.error_class}: {exc}", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return 3
    except UsageError as exc:
        print(f"{exc.error_class}: {exc}", file=sys.stderr)
        return 2
    except DmkfError as exc:
        print(f"{exc.error_class}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"IOError: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

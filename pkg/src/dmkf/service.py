"""HTTP JSON API over a workspace.

Serves the practitioner mapping screen: element browsing, candidate
filtering, mapping commits and repository queries. All endpoints sit under
``/api`` and call the same workspace operations as the CLI, so both surfaces
answer identically. Errors use ``{error_class, message, element?}`` bodies
with 400 for malformed requests, 404 for unknown elements or concepts and
409 for candidate violations and mapping conflicts.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import DmkfError, NoCandidates, UsageError
from .mapping import MappingRecord, SOURCE_MODEL_BY_NAME
from .model import PHASE_BY_NAME, RELATION_BY_NAME, STEREOTYPE_BY_NAME
from .registry import Concept
from .repository import QueryFilter, format_timestamp
from .validator import Severity
from .workspace import _UNSET, Workspace

PAGE_SIZE = 50

_STATUS_BY_CLASS = {
    "UnknownElement": 404,
    "UnknownConcept": 404,
    "CandidateViolation": 409,
    "SupersessionConflict": 409,
    "StaleSession": 409,
}


def _error_body(exc: DmkfError) -> dict:
    body = {"error_class": exc.error_class, "message": str(exc)}
    if exc.element is not None:
        body["element"] = exc.element
    return body


def _parse_enum(table: dict, raw: str | None, what: str):
    if raw is None:
        return None
    if raw not in table:
        raise UsageError(f"unknown {what} {raw!r}")
    return table[raw]


def _parse_bool(raw: str | None, what: str) -> bool | None:
    if raw is None:
        return None
    lowered = raw.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise UsageError(f"{what} must be true or false")


def _concept_json(concept: Concept) -> dict:
    return {
        "name": concept.name,
        "phase": concept.phase.value,
        "stereotypes": concept.stereotype_names(),
        "definition": concept.definition,
    }


def _record_json(record: MappingRecord) -> dict:
    return {
        "element": record.element.path,
        "stereotype": record.stereotype.value,
        "concept": record.concept_name,
        "phase": record.concept_phase.value,
        "mapper": record.mapper,
        "timestamp": format_timestamp(record.timestamp),
        "supersedes": record.supersedes,
    }


def create_app(workspace: Workspace, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="dmkf", docs_url=None, redoc_url=None, openapi_url=None)

    @app.exception_handler(DmkfError)
    async def dmkf_error_handler(request: Request, exc: DmkfError):
        status = _STATUS_BY_CLASS.get(exc.error_class, 400)
        return JSONResponse(status_code=status, content=_error_body(exc))

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error_class": "UsageError", "message": "malformed request"},
        )

    @app.get("/api/plans")
    def get_plans():
        plans = []
        for plan_id in sorted(workspace.plans):
            plan = workspace.plans[plan_id]
            plans.append(
                {
                    "plan_id": plan.plan_id,
                    "title": plan.title,
                    "phases": [phase.value for phase, _ in plan.phases_in_order()],
                }
            )
        return {"plans": plans}

    @app.get("/api/elements")
    def get_elements(
        plan: str | None = None,
        phase: str | None = None,
        stereotype: str | None = None,
        unmapped: str | None = None,
        page: int = 1,
    ):
        if page < 1:
            raise UsageError("page must be >= 1")
        rows = workspace.element_rows(
            plan_id=plan,
            phase=_parse_enum(PHASE_BY_NAME, phase, "phase"),
            stereotype=_parse_enum(STEREOTYPE_BY_NAME, stereotype, "stereotype"),
            unmapped=_parse_bool(unmapped, "unmapped"),
        )
        total = len(rows)
        start = (page - 1) * PAGE_SIZE
        window = rows[start : start + PAGE_SIZE]
        return {
            "elements": [
                {
                    "path": ref.path,
                    "kind": ref.kind.value,
                    "name": ref.element_id,
                    "description": description,
                    "stereotype": st.value if st is not None else None,
                    "mapping": (
                        {
                            "concept": record.concept_name,
                            "mapper": record.mapper,
                            "timestamp": format_timestamp(record.timestamp),
                        }
                        if record is not None
                        else None
                    ),
                }
                for ref, st, description, record in window
            ],
            "total": total,
            "page": page,
            "page_size": PAGE_SIZE,
        }

    @app.get("/api/candidates")
    def get_candidates(element: str, ranked: str | None = None):
        ref, stereotype, _ = workspace.element_entry(element)
        use_ranking = _parse_bool(ranked, "ranked") or False
        if use_ranking:
            try:
                suggestions = workspace.ranked_suggestions(element)
            except NoCandidates:
                suggestions = []
            candidates_json = [
                {**_concept_json(s.concept), "score": s.score} for s in suggestions
            ]
        else:
            candidates_json = [
                _concept_json(c) for c in workspace.candidate_concepts(element)
            ]
        return {
            "element": ref.path,
            "stereotype": stereotype.value if stereotype is not None else None,
            "candidates": candidates_json,
        }

    @app.get("/api/registry/concepts")
    def get_registry_concepts(phase: str | None = None, stereotype: str | None = None):
        wanted_phase = _parse_enum(PHASE_BY_NAME, phase, "phase")
        wanted_stereotype = _parse_enum(STEREOTYPE_BY_NAME, stereotype, "stereotype")
        concepts = [
            _concept_json(c)
            for c in workspace.registry.concepts
            if (wanted_phase is None or c.phase is wanted_phase)
            and (wanted_stereotype is None or wanted_stereotype in c.stereotypes)
        ]
        return {"concepts": concepts}

    @app.post("/api/mappings", status_code=201)
    async def post_mapping(request: Request):
        try:
            payload = await request.json()
        except Exception:
            raise UsageError("request body must be a JSON object") from None
        if not isinstance(payload, dict):
            raise UsageError("request body must be a JSON object")
        for key in ("element", "concept", "mapper"):
            if not isinstance(payload.get(key), str) or not payload[key]:
                raise UsageError(f"request body needs a non-empty string field {key!r}")
        expected = payload.get("expected_current", _UNSET)
        if expected is not _UNSET and expected is not None and not isinstance(expected, str):
            raise UsageError("expected_current must be a concept name or null")
        record = workspace.commit(
            payload["element"], payload["concept"], payload["mapper"], expected
        )
        return {"record": _record_json(record)}

    @app.delete("/api/mappings/{element_path:path}")
    def delete_mapping(element_path: str, mapper: str = "anonymous"):
        record = workspace.retract(element_path, mapper)
        return {"record": _record_json(record)}

    @app.get("/api/repository/units")
    def get_units(
        concept: str | None = None,
        phase: str | None = None,
        plan: str | None = None,
        source_model: str | None = None,
    ):
        filt = QueryFilter(
            phase=_parse_enum(PHASE_BY_NAME, phase, "phase"),
            concept_name=concept,
            plan_id=plan,
            source_model=_parse_enum(SOURCE_MODEL_BY_NAME, source_model, "source model"),
        )
        units = workspace.query_units(filt)
        return {
            "units": [
                {
                    "unit_id": unit.unit_id,
                    "path": unit.element.path,
                    "phase": unit.phase.value,
                    "concept": unit.concept_name,
                    "name": unit.name,
                    "description": unit.description,
                    "source_model": unit.source_model.value,
                }
                for unit in units
            ]
        }

    @app.get("/api/repository/edges")
    def get_edges(relation: str | None = None, unit: str | None = None):
        edges = workspace.query_edge_set(
            relation=_parse_enum(RELATION_BY_NAME, relation, "relation"), unit=unit
        )
        return {
            "edges": [
                {
                    "from_unit": edge.from_unit,
                    "to_unit": edge.to_unit,
                    "relation": edge.relation.value,
                    "provenance": edge.provenance.path,
                }
                for edge in edges
            ]
        }

    @app.get("/api/diagnostics")
    def get_diagnostics(plan: str):
        diagnostics = workspace.diagnostics(plan)
        return {
            "plan": plan,
            "diagnostics": [
                {
                    "rule_id": d.rule_id,
                    "severity": d.severity.value,
                    "element": d.element.path,
                    "message": d.message,
                }
                for d in diagnostics
            ],
            "errors": sum(1 for d in diagnostics if d.severity is Severity.ERROR),
            "warnings": sum(1 for d in diagnostics if d.severity is Severity.WARNING),
        }

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app

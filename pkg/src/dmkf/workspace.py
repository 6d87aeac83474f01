"""Workspace: one registry, the loaded plans and the snapshot store.

The CLI and the HTTP service both drive the engine exclusively through this
layer, so the two surfaces cannot drift apart. Reads work on the current
immutable snapshot; all writes are funnelled through one lock and persisted
(write-temp-then-rename) before they are acknowledged.
"""

from __future__ import annotations

import threading
from datetime import datetime
from pathlib import Path
from typing import Callable, Sequence

from .dsl import parse_plan
from .errors import SupersessionConflict, UnknownElement, UsageError
from .mapping import (
    MappingRecord,
    MappingSession,
    Suggestion,
    TransferResult,
    active_mappings,
    commit_mapping,
    element_index,
    new_session,
    retract_mapping,
    suggest,
    transfer,
)
from .model import ElementRef, Phase, Plan, Stereotype
from .registry import Concept, Registry, candidates, load_registry
from .repository import (
    QueryFilter,
    RepositorySnapshot,
    load_snapshot,
    put,
    query,
    query_edges,
    save_snapshot,
)
from .validator import Diagnostic, validate_plan

_UNSET = object()


class Workspace:
    """Loaded registry + plans + snapshot, with a single serialized writer."""

    def __init__(
        self,
        registry: Registry,
        plans: dict[str, Plan],
        snapshot: RepositorySnapshot,
        snapshot_path: Path | None = None,
        clock: Callable[[], datetime] | None = None,
        force_registry: bool = False,
    ):
        self.registry = registry
        self.plans = plans
        self.snapshot = snapshot
        self.snapshot_path = snapshot_path
        # Soft gate: records produced under a different registry are refused
        # unless the caller explicitly opts into remapping against it.
        self.force_registry = force_registry
        self.session: MappingSession = new_session(registry, clock)
        self._write_lock = threading.Lock()
        self._elements: dict[str, tuple[ElementRef, Stereotype | None, str]] = {}
        for plan in plans.values():
            self._elements.update(element_index(plan))

    @classmethod
    def load(
        cls,
        registry_path: str | Path,
        plan_paths: Sequence[str | Path] = (),
        snapshot_path: str | Path | None = None,
        clock: Callable[[], datetime] | None = None,
        force_registry: bool = False,
    ) -> Workspace:
        registry = load_registry(Path(registry_path).read_text(encoding="utf-8"))
        plans: dict[str, Plan] = {}
        for plan_path in plan_paths:
            plan = parse_plan(Path(plan_path).read_text(encoding="utf-8"))
            if plan.plan_id in plans:
                raise UsageError(f"plan identifier {plan.plan_id!r} loaded twice")
            plans[plan.plan_id] = plan
        snapshot = RepositorySnapshot.empty()
        resolved_snapshot_path = Path(snapshot_path) if snapshot_path is not None else None
        if resolved_snapshot_path is not None and resolved_snapshot_path.exists():
            snapshot = load_snapshot(resolved_snapshot_path)
        return cls(registry, plans, snapshot, resolved_snapshot_path, clock, force_registry)

    # -- reads ---------------------------------------------------------------

    def element_entry(self, path: str) -> tuple[ElementRef, Stereotype | None, str]:
        entry = self._elements.get(path)
        if entry is None:
            raise UnknownElement(f"element {path} does not exist", element=path)
        return entry

    def plan_for(self, plan_id: str) -> Plan:
        plan = self.plans.get(plan_id)
        if plan is None:
            raise UnknownElement(f"plan {plan_id!r} is not loaded", element=plan_id)
        return plan

    def candidate_concepts(self, path: str) -> list[Concept]:
        """Name-ordered candidate set for the element (may be empty)."""
        ref, stereotype, _ = self.element_entry(path)
        if stereotype is None:
            return []
        return candidates(self.registry, stereotype, ref.phase)

    def ranked_suggestions(self, path: str) -> list[Suggestion]:
        ref, _, description = self.element_entry(path)
        return suggest(ref, description, self.registry)

    def active_mapping_for(self, path: str) -> MappingRecord | None:
        return active_mappings(self.snapshot.mappings).get(path)

    def element_rows(
        self,
        plan_id: str | None = None,
        phase: Phase | None = None,
        stereotype: Stereotype | None = None,
        unmapped: bool | None = None,
    ) -> list[tuple[ElementRef, Stereotype | None, str, MappingRecord | None]]:
        active = active_mappings(self.snapshot.mappings)
        rows = []
        for plan_key in sorted(self.plans):
            if plan_id is not None and plan_key != plan_id:
                continue
            for ref, st, description in element_index(self.plans[plan_key]).values():
                if phase is not None and ref.phase is not phase:
                    continue
                if stereotype is not None and st is not stereotype:
                    continue
                record = active.get(ref.path)
                if unmapped is True and (st is None or record is not None):
                    continue
                if unmapped is False and record is None:
                    continue
                rows.append((ref, st, description, record))
        return rows

    def diagnostics(self, plan_id: str) -> list[Diagnostic]:
        return validate_plan(self.plan_for(plan_id))

    def query_units(self, filt: QueryFilter):
        return query(self.snapshot, filt)

    def query_edge_set(self, relation=None, unit=None):
        return query_edges(self.snapshot, relation=relation, unit=unit)

    # -- writes --------------------------------------------------------------

    def _persist(self) -> None:
        if self.snapshot_path is not None:
            save_snapshot(self.snapshot_path, self.snapshot)

    def commit(
        self,
        path: str,
        concept_name: str,
        mapper: str,
        expected_current: object = _UNSET,
    ) -> MappingRecord:
        """Commit one mapping; durable in the snapshot file before returning.

        ``expected_current`` (a concept name, or None for "unmapped") turns
        the commit into a compare-and-swap: a mismatch means another writer
        changed the element's mapping since the caller last looked.
        """
        ref, _, _ = self.element_entry(path)
        plan = self.plan_for(ref.plan_id)
        with self._write_lock:
            if expected_current is not _UNSET:
                record = active_mappings(self.snapshot.mappings).get(path)
                observed = record.concept_name if record is not None else None
                if observed != expected_current:
                    raise SupersessionConflict(
                        f"element {path} is currently mapped to "
                        f"{observed if observed is not None else 'nothing'}",
                        element=path,
                    )
            record = commit_mapping(
                self.session,
                plan,
                self.registry,
                self.snapshot.mappings,
                ref,
                concept_name,
                mapper,
            )
            self.snapshot = put(
                self.snapshot,
                mappings=[record],
                registry_fingerprint=self.registry.fingerprint,
                force=self.force_registry,
            )
            self._persist()
            return record

    def retract(self, path: str, mapper: str) -> MappingRecord:
        with self._write_lock:
            record = retract_mapping(self.session, self.snapshot.mappings, path, mapper)
            self.snapshot = put(
                self.snapshot,
                mappings=[record],
                registry_fingerprint=self.registry.fingerprint,
                force=self.force_registry,
            )
            self._persist()
            return record

    def transfer_plans(self, plan_ids: Sequence[str] | None = None) -> list[tuple[str, TransferResult]]:
        """Run knowledge transfer for the given (default: all) loaded plans."""
        targets = sorted(self.plans) if plan_ids is None else list(plan_ids)
        results = []
        with self._write_lock:
            for plan_id in targets:
                plan = self.plan_for(plan_id)
                result = transfer(plan, self.snapshot.mappings)
                self.snapshot = put(
                    self.snapshot,
                    units=result.units,
                    edges=result.edges,
                    registry_fingerprint=self.registry.fingerprint,
                    force=self.force_registry,
                )
                results.append((plan_id, result))
            self._persist()
        return results

"""File-backed knowledge repository.

A snapshot holds knowledge units, typed edges and the append-only mapping
audit, fingerprinted by the registry they were produced under. Snapshots are
immutable: every write produces a new value, and the on-disk form is written
to a temporary file and renamed into place, so readers always see a complete
snapshot (single writer, many readers).

Snapshot file format (UTF-8, LF, one record per line)::

    meta version=1 registry=<digest>
    unit <unit_id> <path> <phase> <concept> <name> <STRING description> <source_model>
    edge <from> <to> <relation> <provenance_path>
    map <path> <stereotype> <concept> <phase> <STRING mapper> <timestamp> [supersedes=<n>]

A ``map`` record whose concept field is ``-`` is a retraction: the prior
record it supersedes stops being the element's active mapping.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .dsl import quote
from .errors import DmkfError, IntegrityViolation, RegistryMismatch, UsageError
from .mapping import (
    KnowledgeEdge,
    KnowledgeUnit,
    MappingRecord,
    SOURCE_MODEL_BY_NAME,
    SourceModel,
)
from .model import (
    ElementRef,
    PHASE_BY_NAME,
    PHASE_INDEX,
    Phase,
    RELATION_BY_NAME,
    RelationKind,
    INVERSE_RELATION,
    STEREOTYPE_BY_NAME,
)
from .records import RecordSyntaxError, scan_fields

SNAPSHOT_VERSION = 1

_EdgeKey = tuple[str, str, RelationKind]


class SnapshotFormatError(DmkfError):
    """A snapshot file line could not be read; the message cites the line."""


@dataclass(frozen=True)
class RepositorySnapshot:
    units: dict[str, KnowledgeUnit] = dc_field(default_factory=dict)
    edges: dict[_EdgeKey, KnowledgeEdge] = dc_field(default_factory=dict)
    mappings: tuple[MappingRecord, ...] = ()
    registry_fingerprint: str | None = None

    @classmethod
    def empty(cls) -> RepositorySnapshot:
        return cls()


@dataclass(frozen=True)
class QueryFilter:
    """Unit filters; at least one field must be set for a query.

    ``relation`` and ``unit`` select edge queries instead (see
    :func:`query_edges`).
    """

    phase: Phase | None = None
    concept_name: str | None = None
    plan_id: str | None = None
    source_model: SourceModel | None = None
    relation: RelationKind | None = None
    unit: str | None = None

    def has_unit_field(self) -> bool:
        return any(
            value is not None
            for value in (self.phase, self.concept_name, self.plan_id, self.source_model)
        )


def put(
    snapshot: RepositorySnapshot,
    units: Iterable[KnowledgeUnit] = (),
    edges: Iterable[KnowledgeEdge] = (),
    mappings: Iterable[MappingRecord] = (),
    registry_fingerprint: str | None = None,
    force: bool = False,
) -> RepositorySnapshot:
    """Upsert units, deduplicate edges, append mappings; returns a new snapshot.

    Edge endpoints must exist in the union of old and new units. Records
    produced under a different registry are refused unless ``force`` is set
    (remapping against a revised registry is legitimate but must be explicit).
    """
    if (
        registry_fingerprint is not None
        and snapshot.registry_fingerprint is not None
        and registry_fingerprint != snapshot.registry_fingerprint
        and not force
    ):
        raise RegistryMismatch(
            f"snapshot was produced under registry {snapshot.registry_fingerprint}, "
            f"incoming records under {registry_fingerprint} (use force to accept)"
        )
    new_units = dict(snapshot.units)
    for unit in units:
        new_units[unit.unit_id] = unit
    new_edges = dict(snapshot.edges)
    for edge in edges:
        for endpoint in (edge.from_unit, edge.to_unit):
            if endpoint not in new_units:
                raise IntegrityViolation(
                    f"edge endpoint {endpoint} is not a stored unit", element=endpoint
                )
        new_edges.setdefault((edge.from_unit, edge.to_unit, edge.relation), edge)
    new_fingerprint = (
        registry_fingerprint if registry_fingerprint is not None else snapshot.registry_fingerprint
    )
    if force and registry_fingerprint is not None:
        new_fingerprint = registry_fingerprint
    return RepositorySnapshot(
        units=new_units,
        edges=new_edges,
        mappings=snapshot.mappings + tuple(mappings),
        registry_fingerprint=new_fingerprint,
    )


def _unit_sort_key(unit: KnowledgeUnit):
    return (unit.element.plan_id, PHASE_INDEX[unit.phase], unit.element.path)


def query(snapshot: RepositorySnapshot, filt: QueryFilter) -> list[KnowledgeUnit]:
    """Units matching every set filter field, in (plan, phase, path) order."""
    if not filt.has_unit_field():
        raise UsageError("unit query requires at least one filter field")
    out = []
    for unit in snapshot.units.values():
        if filt.phase is not None and unit.phase is not filt.phase:
            continue
        if filt.concept_name is not None and unit.concept_name != filt.concept_name:
            continue
        if filt.plan_id is not None and unit.element.plan_id != filt.plan_id:
            continue
        if filt.source_model is not None and unit.source_model is not filt.source_model:
            continue
        out.append(unit)
    out.sort(key=_unit_sort_key)
    return out


def _reverse(edge: KnowledgeEdge, relation: RelationKind) -> KnowledgeEdge:
    return KnowledgeEdge(
        from_unit=edge.to_unit,
        to_unit=edge.from_unit,
        relation=relation,
        provenance=edge.provenance,
    )


def query_edges(
    snapshot: RepositorySnapshot,
    relation: RelationKind | None = None,
    unit: str | None = None,
) -> list[KnowledgeEdge]:
    """Edge query honouring the derived inverse relations.

    Asking for isControlledBy returns reversed Controls edges and Involves
    returns reversed ParticipatesIn edges; they are never stored. With a
    ``unit`` filter, edges incident to the unit match, and symmetric isPeer
    edges are reoriented to start at the queried unit.
    """
    if relation is None and unit is None:
        raise UsageError("edge query requires a relation or a unit filter")

    derived_from = {inv: stored for stored, inv in INVERSE_RELATION.items()}
    out: list[KnowledgeEdge] = []
    if relation is not None and relation in derived_from:
        stored_kind = derived_from[relation]
        pool = [
            _reverse(edge, relation)
            for edge in snapshot.edges.values()
            if edge.relation is stored_kind
        ]
    elif relation is not None:
        pool = [edge for edge in snapshot.edges.values() if edge.relation is relation]
    else:
        pool = list(snapshot.edges.values())

    for edge in pool:
        if unit is not None:
            if unit not in (edge.from_unit, edge.to_unit):
                continue
            if edge.relation is RelationKind.IS_PEER and edge.from_unit != unit:
                edge = _reverse(edge, RelationKind.IS_PEER)
        out.append(edge)
    out.sort(key=lambda e: (e.from_unit, e.to_unit, e.relation.value))
    return out


def format_timestamp(value: datetime) -> str:
    return value.astimezone(timezone.utc).isoformat(timespec="microseconds").replace(
        "+00:00", "Z"
    )


def _parse_timestamp(text: str) -> datetime:
    raw = text[:-1] + "+00:00" if text.endswith("Z") else text
    parsed = datetime.fromisoformat(raw)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def export_snapshot(snapshot: RepositorySnapshot) -> str:
    """Render the snapshot to its canonical text form.

    Units sort by (plan, phase, path) and edges by endpoints and relation;
    mapping records keep their append order. ``import_snapshot`` of the
    result reproduces the snapshot exactly.
    """
    fingerprint = snapshot.registry_fingerprint or "-"
    lines = [f"meta version={SNAPSHOT_VERSION} registry={fingerprint}"]
    for unit in sorted(snapshot.units.values(), key=_unit_sort_key):
        lines.append(
            f"unit {unit.unit_id} {unit.element.path} {unit.phase.value} "
            f"{unit.concept_name} {unit.name} {quote(unit.description)} "
            f"{unit.source_model.value}"
        )
    for edge in sorted(
        snapshot.edges.values(), key=lambda e: (e.from_unit, e.to_unit, e.relation.value)
    ):
        lines.append(
            f"edge {edge.from_unit} {edge.to_unit} {edge.relation.value} {edge.provenance.path}"
        )
    for record in snapshot.mappings:
        concept = record.concept_name if record.concept_name is not None else "-"
        line = (
            f"map {record.element.path} {record.stereotype.value} {concept} "
            f"{record.concept_phase.value} {quote(record.mapper)} "
            f"{format_timestamp(record.timestamp)}"
        )
        if record.supersedes is not None:
            line += f" supersedes={record.supersedes}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _import_unit(values: list[str], quoted: list[bool], line_no: int) -> KnowledgeUnit:
    if len(values) != 8 or not quoted[6] or any(quoted[:6]) or quoted[7]:
        raise SnapshotFormatError(f"line {line_no}: malformed unit record")
    _, unit_id, path, phase_name, concept, name, description, source_name = values
    if phase_name not in PHASE_BY_NAME:
        raise SnapshotFormatError(f"line {line_no}: unknown phase {phase_name!r}")
    if source_name not in SOURCE_MODEL_BY_NAME:
        raise SnapshotFormatError(f"line {line_no}: unknown source model {source_name!r}")
    try:
        element = ElementRef.parse(path)
    except ValueError as exc:
        raise SnapshotFormatError(f"line {line_no}: {exc}") from exc
    return KnowledgeUnit(
        unit_id=unit_id,
        element=element,
        phase=PHASE_BY_NAME[phase_name],
        concept_name=concept,
        name=name,
        description=description,
        source_model=SOURCE_MODEL_BY_NAME[source_name],
    )


def _import_edge(values: list[str], quoted: list[bool], line_no: int) -> KnowledgeEdge:
    if len(values) != 5 or any(quoted):
        raise SnapshotFormatError(f"line {line_no}: malformed edge record")
    _, from_unit, to_unit, relation_name, provenance_path = values
    if relation_name not in RELATION_BY_NAME:
        raise SnapshotFormatError(f"line {line_no}: unknown relation {relation_name!r}")
    relation = RELATION_BY_NAME[relation_name]
    if relation in INVERSE_RELATION.values():
        raise SnapshotFormatError(
            f"line {line_no}: relation {relation_name!r} is derived and never stored"
        )
    try:
        provenance = ElementRef.parse(provenance_path)
    except ValueError as exc:
        raise SnapshotFormatError(f"line {line_no}: {exc}") from exc
    return KnowledgeEdge(from_unit, to_unit, relation, provenance)


def _import_map(values: list[str], quoted: list[bool], line_no: int) -> MappingRecord:
    if len(values) not in (7, 8) or not quoted[5] or quoted[6]:
        raise SnapshotFormatError(f"line {line_no}: malformed map record")
    _, path, stereotype_name, concept, phase_name, mapper, timestamp = values[:7]
    supersedes: int | None = None
    if len(values) == 8:
        tail = values[7]
        if not tail.startswith("supersedes=") or quoted[7]:
            raise SnapshotFormatError(f"line {line_no}: malformed map record tail {tail!r}")
        try:
            supersedes = int(tail.partition("=")[2])
        except ValueError as exc:
            raise SnapshotFormatError(f"line {line_no}: bad supersedes index") from exc
    if stereotype_name not in STEREOTYPE_BY_NAME:
        raise SnapshotFormatError(f"line {line_no}: unknown stereotype {stereotype_name!r}")
    if phase_name not in PHASE_BY_NAME:
        raise SnapshotFormatError(f"line {line_no}: unknown phase {phase_name!r}")
    try:
        element = ElementRef.parse(path)
        when = _parse_timestamp(timestamp)
    except ValueError as exc:
        raise SnapshotFormatError(f"line {line_no}: {exc}") from exc
    return MappingRecord(
        element=element,
        stereotype=STEREOTYPE_BY_NAME[stereotype_name],
        concept_name=None if concept == "-" else concept,
        concept_phase=PHASE_BY_NAME[phase_name],
        mapper=mapper,
        timestamp=when,
        supersedes=supersedes,
    )


def import_snapshot(text: str) -> RepositorySnapshot:
    """Parse snapshot text, checking referential and audit integrity."""
    lines = text.splitlines()
    if not lines:
        raise SnapshotFormatError("line 1: missing meta header")
    units: dict[str, KnowledgeUnit] = {}
    edges: dict[_EdgeKey, KnowledgeEdge] = {}
    mappings: list[MappingRecord] = []
    fingerprint: str | None = None
    saw_meta = False

    for line_no, line in enumerate(lines, start=1):
        try:
            fields = scan_fields(line)
        except RecordSyntaxError as exc:
            raise SnapshotFormatError(f"line {line_no}: {exc}") from exc
        if not fields:
            continue
        values = [f.value for f in fields]
        quoted = [f.quoted for f in fields]
        head = values[0]
        if not saw_meta:
            if head != "meta":
                raise SnapshotFormatError(f"line {line_no}: expected meta header first")
            if (
                len(values) != 3
                or values[1] != f"version={SNAPSHOT_VERSION}"
                or not values[2].startswith("registry=")
            ):
                raise SnapshotFormatError(f"line {line_no}: malformed meta header")
            raw = values[2].partition("=")[2]
            fingerprint = None if raw == "-" else raw
            saw_meta = True
            continue
        if head == "unit":
            unit = _import_unit(values, quoted, line_no)
            units[unit.unit_id] = unit
        elif head == "edge":
            edge = _import_edge(values, quoted, line_no)
            edges[(edge.from_unit, edge.to_unit, edge.relation)] = edge
        elif head == "map":
            mappings.append(_import_map(values, quoted, line_no))
        else:
            raise SnapshotFormatError(f"line {line_no}: unknown record kind {head!r}")

    if not saw_meta:
        raise SnapshotFormatError("line 1: missing meta header")

    for edge in edges.values():
        for endpoint in (edge.from_unit, edge.to_unit):
            if endpoint not in units:
                raise IntegrityViolation(
                    f"edge endpoint {endpoint} is not a stored unit", element=endpoint
                )
    active: dict[str, int] = {}
    for index, record in enumerate(mappings):
        if record.supersedes is not None and not 0 <= record.supersedes < index:
            raise IntegrityViolation(
                f"map record {index} supersedes out-of-range record {record.supersedes}"
            )
        prior = active.get(record.element.path)
        if prior is not None and record.supersedes != prior:
            raise IntegrityViolation(
                f"map record {index} leaves two active records for {record.element.path}"
            )
        if prior is None and record.concept_name is None:
            raise IntegrityViolation(
                f"map record {index} retracts {record.element.path}, which has no active mapping"
            )
        active[record.element.path] = index
    return RepositorySnapshot(
        units=units, edges=edges, mappings=tuple(mappings), registry_fingerprint=fingerprint
    )


def save_snapshot(path: str | Path, snapshot: RepositorySnapshot) -> None:
    """Atomically write the snapshot: temp file in the same directory, rename."""
    path = Path(path)
    text = export_snapshot(snapshot)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def load_snapshot(path: str | Path) -> RepositorySnapshot:
    return import_snapshot(Path(path).read_text(encoding="utf-8"))

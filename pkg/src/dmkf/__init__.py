"""dmkf: agent-oriented disaster management plan knowledge toolkit.

Parses plans written in a small DSL, validates the cross-references between
their seven model templates, filters metamodel concepts by stereotype
annotation, records practitioner mapping decisions and serves cross-plan
queries over the resulting knowledge repository.
"""

from .dsl import ParseError, PlanParseError, parse_plan, render_plan
from .errors import (
    CandidateViolation,
    DmkfError,
    IntegrityViolation,
    NoCandidates,
    RegistryMismatch,
    StaleSession,
    SupersessionConflict,
    UnknownConcept,
    UnknownElement,
    UsageError,
    ValidationGate,
)
from .mapping import (
    KnowledgeEdge,
    KnowledgeUnit,
    MappingRecord,
    MappingSession,
    SourceModel,
    Suggestion,
    TransferResult,
    active_mappings,
    commit_mapping,
    jaccard,
    new_session,
    retract_mapping,
    suggest,
    text_tokens,
    transfer,
    unit_id_for,
)
from .model import (
    ActivityDef,
    AgentDef,
    ElementKind,
    ElementRef,
    EnvEntity,
    GoalNode,
    Interaction,
    OrgKind,
    OrgRelation,
    Phase,
    PhaseModels,
    Plan,
    RelationKind,
    Responsibility,
    RoleDef,
    Scenario,
    ScenarioStep,
    SourceSpan,
    Stereotype,
    StepMode,
    TriggerDef,
    enumerate_elements,
    stereotype_of,
)
from .registry import (
    Concept,
    Registry,
    RegistryIssue,
    RegistryLoadError,
    candidates,
    concept_lookup,
    load_registry,
    validate_registry,
)
from .repository import (
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
from .validator import Diagnostic, Severity, rule_table, validate_plan
from .workspace import Workspace

__version__ = "0.1.0"

"""The metamodel concept catalogue (the M2 layer).

A registry holds concepts tagged with a phase, annotated with one or more
stereotypes and carrying a terminology definition. Candidate filtering —
"which concepts may this element legally map to" — is a lookup by
(stereotype, phase). Registries are immutable after load and safe for
concurrent reads.

File format (line-oriented, UTF-8, ``#`` comments)::

    counts Prevention=21 Preparedness=25 Response=25 Recovery=21   # optional, once
    concept <IDENT> phase <PhaseName> stereotypes <S>(,<S>)* definition <STRING>
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DmkfError
from .model import PHASE_BY_NAME, PHASE_INDEX, Phase, STEREOTYPE_BY_NAME, Stereotype
from .records import Field, RecordSyntaxError, digest16, scan_fields


@dataclass(frozen=True)
class Concept:
    """One catalogue concept. ``(name, phase)`` identifies it in a registry."""

    name: str
    phase: Phase
    stereotypes: frozenset[Stereotype]
    definition: str

    def stereotype_names(self) -> list[str]:
        return sorted(s.value for s in self.stereotypes)


@dataclass(frozen=True)
class RegistryIssue:
    """An invariant violation found by :func:`validate_registry`."""

    code: str
    message: str

    def __str__(self) -> str:
        return self.message


class RegistryLoadError(DmkfError):
    """Raised by :func:`load_registry`; carries every problem found."""

    def __init__(self, problems: list[str]):
        super().__init__(f"{len(problems)} registry problem(s); first: {problems[0]}")
        self.problems = tuple(problems)


@dataclass(frozen=True)
class Registry:
    """An immutable concept catalogue with optional declared per-phase counts."""

    concepts: tuple[Concept, ...]
    declared_counts: dict[Phase, int] | None = None
    fingerprint: str = ""
    _by_key: dict[tuple[str, Phase], Concept] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self):
        ordered = tuple(
            sorted(self.concepts, key=lambda c: (PHASE_INDEX[c.phase], c.name))
        )
        object.__setattr__(self, "concepts", ordered)
        index: dict[tuple[str, Phase], Concept] = {}
        for concept in ordered:
            index.setdefault((concept.name, concept.phase), concept)
        object.__setattr__(self, "_by_key", index)
        if not self.fingerprint:
            object.__setattr__(self, "fingerprint", digest16(canonical_dump(self)))

    def lookup(self, name: str, phase: Phase) -> Concept | None:
        return self._by_key.get((name, phase))

    def phase_counts(self) -> dict[Phase, int]:
        counts = {phase: 0 for phase in Phase}
        for concept in self.concepts:
            counts[concept.phase] += 1
        return counts


def canonical_dump(registry: Registry) -> str:
    """Deterministic text form of a registry, used for content fingerprints."""
    from .dsl import quote

    lines = []
    if registry.declared_counts is not None:
        parts = " ".join(
            f"{phase.value}={registry.declared_counts[phase]}"
            for phase in Phase
            if phase in registry.declared_counts
        )
        lines.append(f"counts {parts}")
    for concept in registry.concepts:
        stereotypes = ",".join(concept.stereotype_names())
        lines.append(
            f"concept {concept.name} phase {concept.phase.value} "
            f"stereotypes {stereotypes} definition {quote(concept.definition)}"
        )
    return "\n".join(lines) + "\n"


def _parse_concept_line(fields: list[Field], line_no: int, problems: list[str]) -> Concept | None:
    def bad(msg: str) -> None:
        problems.append(f"line {line_no}: {msg}")

    if len(fields) < 2 or fields[1].quoted:
        bad("expected a concept name after 'concept'")
        return None
    name = fields[1].value
    rest = fields[2:]
    if len(rest) < 1 or rest[0].value != "phase":
        bad("expected 'phase' after the concept name")
        return None
    if len(rest) < 2 or rest[1].value not in PHASE_BY_NAME:
        bad("expected a phase name after 'phase'")
        return None
    phase = PHASE_BY_NAME[rest[1].value]
    rest = rest[2:]
    if not rest or rest[0].value != "stereotypes":
        bad("expected 'stereotypes'")
        return None
    rest = rest[1:]
    stereotype_words: list[str] = []
    while rest and not rest[0].quoted and rest[0].value != "definition":
        stereotype_words.append(rest[0].value)
        rest = rest[1:]
    stereotypes: set[Stereotype] = set()
    ok = True
    for word in ",".join(stereotype_words).split(","):
        word = word.strip()
        if not word:
            continue
        if word not in STEREOTYPE_BY_NAME:
            bad(f"unknown stereotype {word!r}")
            ok = False
            continue
        stereotypes.add(STEREOTYPE_BY_NAME[word])
    if not rest or rest[0].value != "definition":
        bad("expected 'definition'")
        return None
    rest = rest[1:]
    if len(rest) != 1 or not rest[0].quoted:
        bad("expected one quoted definition string")
        return None
    if not ok:
        return None
    return Concept(
        name=name, phase=phase, stereotypes=frozenset(stereotypes), definition=rest[0].value
    )


def _parse_counts_line(fields: list[Field], line_no: int, problems: list[str]) -> dict[Phase, int] | None:
    counts: dict[Phase, int] = {}
    ok = True
    for f in fields[1:]:
        if f.quoted or "=" not in f.value:
            problems.append(f"line {line_no}: expected <Phase>=<count>, got {f.value!r}")
            ok = False
            continue
        phase_name, _, number = f.value.partition("=")
        if phase_name not in PHASE_BY_NAME:
            problems.append(f"line {line_no}: unknown phase {phase_name!r}")
            ok = False
            continue
        phase = PHASE_BY_NAME[phase_name]
        if phase in counts:
            problems.append(f"line {line_no}: phase {phase_name} counted twice")
            ok = False
            continue
        try:
            counts[phase] = int(number)
        except ValueError:
            problems.append(f"line {line_no}: invalid count {number!r}")
            ok = False
    return counts if ok else None


def load_registry(text: str) -> Registry:
    """Parse registry text, enforcing every invariant.

    Raises :class:`RegistryLoadError` carrying all problems: syntax errors,
    duplicate (name, phase) pairs, empty stereotype sets and declared-count
    mismatches. On success the concept list iterates in (phase enum order,
    name ascending) order and the fingerprint digests the input text.
    """
    problems: list[str] = []
    concepts: list[Concept] = []
    declared: dict[Phase, int] | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        try:
            fields = scan_fields(line)
        except RecordSyntaxError as exc:
            problems.append(f"line {line_no}: {exc}")
            continue
        if not fields:
            continue
        head = fields[0].value
        if head == "counts":
            if declared is not None:
                problems.append(f"line {line_no}: duplicate counts line")
                continue
            declared = _parse_counts_line(fields, line_no, problems)
        elif head == "concept":
            concept = _parse_concept_line(fields, line_no, problems)
            if concept is not None:
                concepts.append(concept)
        else:
            problems.append(f"line {line_no}: unknown record kind {head!r}")

    registry = Registry(
        concepts=tuple(concepts), declared_counts=declared, fingerprint=digest16(text)
    )
    problems.extend(str(issue) for issue in validate_registry(registry))
    if problems:
        raise RegistryLoadError(problems)
    return registry


def validate_registry(registry: Registry) -> list[RegistryIssue]:
    """Return one issue per invariant violation; empty iff the registry is valid."""
    issues: list[RegistryIssue] = []
    seen: set[tuple[str, Phase]] = set()
    for concept in registry.concepts:
        key = (concept.name, concept.phase)
        if key in seen:
            issues.append(
                RegistryIssue(
                    "duplicate-concept",
                    f"concept {concept.name!r} declared twice in phase {concept.phase.value}",
                )
            )
        seen.add(key)
        if not concept.stereotypes:
            issues.append(
                RegistryIssue(
                    "empty-stereotypes",
                    f"concept {concept.name!r} in phase {concept.phase.value} "
                    "has no stereotype annotation",
                )
            )
    if registry.declared_counts is not None:
        actual = registry.phase_counts()
        for phase in Phase:
            if phase not in registry.declared_counts:
                continue
            declared = registry.declared_counts[phase]
            if actual[phase] != declared:
                issues.append(
                    RegistryIssue(
                        "count-mismatch",
                        f"{phase.value}: declared {declared}, found {actual[phase]}",
                    )
                )
    return issues


def candidates(registry: Registry, stereotype: Stereotype, phase: Phase) -> list[Concept]:
    """Concepts legal for an element of this stereotype and phase, name order."""
    return [
        c for c in registry.concepts if c.phase is phase and stereotype in c.stereotypes
    ]


def concept_lookup(registry: Registry, name: str, phase: Phase) -> Concept | None:
    """The unique concept with this name in this phase, or None."""
    return registry.lookup(name, phase)

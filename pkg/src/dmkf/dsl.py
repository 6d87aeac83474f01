"""Parser and canonical renderer for the plan DSL.

The DSL is the machine-readable form of the seven agent-oriented model
templates. Grammar sketch (terminals quoted, ``IDENT = [A-Za-z_][A-Za-z0-9_-]*``,
``STRING`` double-quoted with ``\\"`` and ``\\\\`` escapes, ``#`` comments)::

    plan        := "plan" STRING "as" IDENT "{" phaseBlock+ "}"
    phaseBlock  := "phase" phaseName "{" section* "}"
    goalDecl    := "goal" IDENT STRING "{" (goalDecl | "role" IDENT)* "}"
    roleDecl    := "role" IDENT STRING "{" respDecl* consDecl* "}"
    respDecl    := "responsibility" STRING "for" IDENT
    consDecl    := "constraint" STRING
    orgBlock    := "organisation" "{" (IDENT ("controls"|"peer") IDENT)* "}"
    interDecl   := "interaction" IDENT "pursues" IDENT
                   "{" "participants" IDENT ("," IDENT)+ "}"
    envBlock    := "environment" "{" ("resource" IDENT STRING?)* "}"
    agentDecl   := "agent" IDENT STRING "plays" IDENT ("," IDENT)*
                   "{" trigDecl* actDecl* "}"
    trigDecl    := "trigger" IDENT STRING
    actDecl     := "activity" IDENT STRING
    scenDecl    := "scenario" IDENT "achieves" IDENT
                   "{" "pre" STRING stepDecl+ "post" STRING "}"
    stepDecl    := "step" IDENT "by" IDENT ("uses" IDENT ("," IDENT)*)?
                   "[" ("sequential"|"parallel"|"interleaved") "]"

Keywords are reserved and cannot be used as identifiers. Parsing collects
every error in one pass, recovering at statement boundaries; identical input
bytes always yield identical results. ``parse_plan(render_plan(p)) == p``
holds for every structurally valid plan (spans are ignored by equality).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DmkfError
from .model import (
    ActivityDef,
    AgentDef,
    EnvEntity,
    GoalNode,
    Interaction,
    OrgKind,
    OrgRelation,
    PHASE_BY_NAME,
    Phase,
    PhaseModels,
    Plan,
    Responsibility,
    RoleDef,
    Scenario,
    ScenarioStep,
    SourceSpan,
    STEP_MODE_BY_NAME,
    TriggerDef,
)

KEYWORDS = frozenset(
    {
        "plan", "as", "phase",
        "goal", "role", "responsibility", "for", "constraint",
        "organisation", "controls", "peer",
        "interaction", "pursues", "participants",
        "environment", "resource",
        "agent", "plays", "trigger", "activity",
        "scenario", "achieves", "pre", "post", "step", "by", "uses",
        "sequential", "parallel", "interleaved",
    }
)

_SECTION_KEYWORDS = frozenset(
    {"goal", "role", "organisation", "interaction", "environment", "agent", "scenario"}
)

_MAX_GOAL_DEPTH = 100


@dataclass(frozen=True)
class ParseError:
    """One parse failure, reproducible byte-for-byte for identical input."""

    span: SourceSpan
    expected: str
    found: str

    @property
    def message(self) -> str:
        return f"{self.span.line}:{self.span.column}: expected {self.expected}, found {self.found}"

    def __str__(self) -> str:
        return self.message


class PlanParseError(DmkfError):
    """Raised by :func:`parse_plan`; carries every error found in one pass."""

    def __init__(self, errors: tuple[ParseError, ...]):
        first = errors[0].message if errors else "no details"
        super().__init__(f"{len(errors)} parse error(s); first: {first}")
        self.errors = errors


class _Tok(Enum):
    IDENT = "identifier"
    STRING = "string"
    KEYWORD = "keyword"
    PUNCT = "punctuation"
    EOF = "end of input"


@dataclass(frozen=True)
class _Token:
    kind: _Tok
    text: str
    span: SourceSpan


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch in "_-")


def _lex(text: str) -> tuple[list[_Token], list[ParseError]]:
    tokens: list[_Token] = []
    errors: list[ParseError] = []
    i = 0
    byte = 0
    line = 1
    col = 1
    n = len(text)

    def char_bytes(ch: str) -> int:
        return len(ch.encode("utf-8", errors="surrogatepass"))

    def advance_one() -> None:
        nonlocal i, byte, line, col
        ch = text[i]
        byte += char_bytes(ch)
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1
        i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance_one()
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                advance_one()
            continue

        start_byte, start_line, start_col = byte, line, col
        if _is_ident_start(ch):
            lexeme = []
            while i < n and _is_ident_char(text[i]):
                lexeme.append(text[i])
                advance_one()
            word = "".join(lexeme)
            kind = _Tok.KEYWORD if word in KEYWORDS else _Tok.IDENT
            tokens.append(
                _Token(kind, word, SourceSpan(start_byte, byte, start_line, start_col))
            )
            continue
        if ch in "{}[],":
            advance_one()
            tokens.append(
                _Token(_Tok.PUNCT, ch, SourceSpan(start_byte, byte, start_line, start_col))
            )
            continue
        if ch == '"':
            advance_one()
            value = []
            closed = False
            bad_escape = False
            while i < n:
                c = text[i]
                if c == '"':
                    advance_one()
                    closed = True
                    break
                if c in "\n\r":
                    break
                if c == "\\":
                    advance_one()
                    if i < n and text[i] in ('"', "\\"):
                        value.append(text[i])
                        advance_one()
                    else:
                        bad_escape = True
                        if i < n and text[i] not in "\n\r":
                            advance_one()
                    continue
                value.append(c)
                advance_one()
            span = SourceSpan(start_byte, byte, start_line, start_col)
            if not closed:
                errors.append(ParseError(span, "closing '\"'", "unterminated string"))
            elif bad_escape:
                errors.append(
                    ParseError(span, "escape '\\\"' or '\\\\'", "unsupported escape sequence")
                )
            else:
                tokens.append(_Token(_Tok.STRING, "".join(value), span))
            continue

        advance_one()
        errors.append(
            ParseError(
                SourceSpan(start_byte, byte, start_line, start_col),
                "a token",
                f"unexpected character {ch!r}",
            )
        )

    tokens.append(_Token(_Tok.EOF, "", SourceSpan(byte, byte, line, col)))
    return tokens, errors


class _Resync(Exception):
    """Internal: unwind to the nearest recovery point."""


class _PhaseBuilder:
    def __init__(self):
        self.goals: list[GoalNode] = []
        self.roles: list[RoleDef] = []
        self.organisation: list[OrgRelation] = []
        self.interactions: list[Interaction] = []
        self.environment: list[EnvEntity] = []
        self.agents: list[AgentDef] = []
        self.scenarios: list[Scenario] = []
        self.goal_ids: set[str] = set()
        self.ids: dict[str, set[str]] = {
            "role": set(),
            "interaction": set(),
            "resource": set(),
            "agent": set(),
            "scenario": set(),
        }

    def build(self) -> PhaseModels:
        return PhaseModels(
            goals=tuple(self.goals),
            roles=tuple(self.roles),
            organisation=tuple(self.organisation),
            interactions=tuple(self.interactions),
            environment=tuple(self.environment),
            agents=tuple(self.agents),
            scenarios=tuple(self.scenarios),
        )


class _Parser:
    def __init__(self, tokens: list[_Token], errors: list[ParseError]):
        self.toks = tokens
        self.pos = 0
        self.errors = errors

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        tok = self.toks[self.pos]
        if tok.kind is not _Tok.EOF:
            self.pos += 1
        return tok

    def prev_end(self) -> int:
        return self.toks[max(self.pos - 1, 0)].span.end

    @staticmethod
    def describe(tok: _Token) -> str:
        if tok.kind is _Tok.EOF:
            return "end of input"
        if tok.kind is _Tok.STRING:
            return "string"
        return f"'{tok.text}'"

    def error(self, expected: str, tok: _Token | None = None) -> ParseError:
        tok = tok if tok is not None else self.peek()
        err = ParseError(tok.span, expected, self.describe(tok))
        self.errors.append(err)
        return err

    def fail(self, expected: str, tok: _Token | None = None) -> None:
        self.error(expected, tok)
        raise _Resync

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind is _Tok.KEYWORD and tok.text == word

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok.kind is _Tok.PUNCT and tok.text == ch

    def expect_keyword(self, word: str) -> _Token:
        if not self.at_keyword(word):
            self.fail(f"'{word}'")
        return self.advance()

    def expect_punct(self, ch: str) -> _Token:
        if not self.at_punct(ch):
            self.fail(f"'{ch}'")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> _Token:
        tok = self.peek()
        if tok.kind is not _Tok.IDENT:
            self.fail(what)
        return self.advance()

    def expect_string(self, what: str = "string") -> _Token:
        tok = self.peek()
        if tok.kind is not _Tok.STRING:
            self.fail(what)
        return self.advance()

    def sync(self, stop_keywords: frozenset[str]) -> None:
        """Skip to the next statement boundary: a stop keyword or an
        unmatched closing brace at the current nesting level."""
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind is _Tok.EOF:
                return
            if tok.kind is _Tok.PUNCT and tok.text == "{":
                depth += 1
            elif tok.kind is _Tok.PUNCT and tok.text == "}":
                if depth == 0:
                    return
                depth -= 1
            elif depth == 0 and tok.kind is _Tok.KEYWORD and tok.text in stop_keywords:
                return
            self.advance()

    def span_from(self, start: _Token) -> SourceSpan:
        return SourceSpan(start.span.start, self.prev_end(), start.span.line, start.span.column)

    # -- grammar -----------------------------------------------------------

    def parse(self) -> Plan | None:
        phases: dict[Phase, PhaseModels] = {}
        plan_id = ""
        title = ""
        header_ok = True
        try:
            self.expect_keyword("plan")
            title = self.expect_string("plan title string").text
            self.expect_keyword("as")
            plan_id = self.expect_ident("plan identifier").text
            self.expect_punct("{")
        except _Resync:
            header_ok = False
            self.sync(frozenset({"phase"}))

        close_tok: _Token | None = None
        while True:
            tok = self.peek()
            if tok.kind is _Tok.EOF:
                if header_ok:
                    self.error("'phase' or '}'")
                break
            if tok.kind is _Tok.PUNCT and tok.text == "}":
                close_tok = self.advance()
                break
            if self.at_keyword("phase"):
                self.phase_block(phases)
                continue
            self.error("'phase' or '}'")
            self.sync(frozenset({"phase"}))

        if close_tok is not None and self.peek().kind is not _Tok.EOF:
            self.error("end of input")
        if header_ok and not phases and not self.errors:
            anchor = close_tok if close_tok is not None else self.peek()
            self.error("at least one populated phase", anchor)

        if self.errors:
            return None
        try:
            return Plan(plan_id=plan_id, title=title, phases=phases)
        except ValueError as exc:  # safety net: keep arbitrary input total
            anchor = close_tok if close_tok is not None else self.peek()
            self.error(f"a structurally valid plan ({exc})", anchor)
            return None

    def phase_block(self, phases: dict[Phase, PhaseModels]) -> None:
        self.expect_keyword("phase")
        duplicate = False
        phase: Phase | None = None
        try:
            name_tok = self.peek()
            if name_tok.kind is not _Tok.IDENT or name_tok.text not in PHASE_BY_NAME:
                self.fail("a phase name ('Prevention', 'Preparedness', 'Response' or 'Recovery')")
            self.advance()
            phase = PHASE_BY_NAME[name_tok.text]
            if phase in phases:
                self.error(f"a phase declared once, '{name_tok.text}'", name_tok)
                duplicate = True
            self.expect_punct("{")
        except _Resync:
            self.sync(frozenset({"phase"}))
            return

        builder = _PhaseBuilder()
        while True:
            tok = self.peek()
            if tok.kind is _Tok.EOF:
                self.error("a section or '}'")
                break
            if tok.kind is _Tok.PUNCT and tok.text == "}":
                self.advance()
                break
            handler = {
                "goal": self.goal_section,
                "role": self.role_decl,
                "organisation": self.org_block,
                "interaction": self.inter_decl,
                "environment": self.env_block,
                "agent": self.agent_decl,
                "scenario": self.scen_decl,
            }.get(tok.text if tok.kind is _Tok.KEYWORD else "")
            if handler is None:
                self.error(
                    "a section ('goal', 'role', 'organisation', 'interaction', "
                    "'environment', 'agent' or 'scenario')"
                )
                self.sync(_SECTION_KEYWORDS | {"phase"})
                if self.at_keyword("phase"):
                    break
                continue
            try:
                handler(builder)
            except _Resync:
                self.sync(_SECTION_KEYWORDS | {"phase"})
                if self.at_keyword("phase"):
                    break

        if phase is not None and not duplicate:
            try:
                phases[phase] = builder.build()
            except ValueError as exc:  # safety net: keep arbitrary input total
                self.error(f"a structurally valid phase ({exc})", self.peek())

    def goal_section(self, builder: _PhaseBuilder) -> None:
        goal = self.goal_decl(builder, depth=0)
        if goal is not None:
            builder.goals.append(goal)

    def goal_decl(self, builder: _PhaseBuilder, depth: int) -> GoalNode | None:
        start = self.expect_keyword("goal")
        if depth >= _MAX_GOAL_DEPTH:
            self.error("goal nesting below the depth limit", start)
            self.sync(frozenset())
            if self.at_punct("}"):
                self.advance()
            raise _Resync
        name_tok = self.expect_ident("goal identifier")
        description = self.expect_string("goal description string").text
        self.expect_punct("{")
        duplicate = name_tok.text in builder.goal_ids
        if duplicate:
            self.error("a unique goal identifier", name_tok)
        builder.goal_ids.add(name_tok.text)

        subgoals: list[GoalNode] = []
        role_ids: list[str] = []
        while True:
            tok = self.peek()
            if tok.kind is _Tok.PUNCT and tok.text == "}":
                self.advance()
                break
            if tok.kind is _Tok.EOF:
                self.fail("'goal', 'role' or '}'")
            if self.at_keyword("goal"):
                sub = self.goal_decl(builder, depth + 1)
                if sub is not None:
                    subgoals.append(sub)
                continue
            if self.at_keyword("role"):
                self.advance()
                role_ids.append(self.expect_ident("role identifier").text)
                continue
            self.error("'goal', 'role' or '}'")
            self.sync(frozenset({"goal", "role"}))
            if self.peek().kind is _Tok.EOF:
                raise _Resync

        if duplicate:
            return None
        return GoalNode(
            goal_id=name_tok.text,
            description=description,
            subgoals=tuple(subgoals),
            role_ids=tuple(role_ids),
            span=self.span_from(start),
        )

    def role_decl(self, builder: _PhaseBuilder) -> None:
        start = self.expect_keyword("role")
        name_tok = self.expect_ident("role identifier")
        description = self.expect_string("role description string").text
        self.expect_punct("{")
        responsibilities: list[Responsibility] = []
        constraints: list[str] = []
        while self.at_keyword("responsibility"):
            self.advance()
            text = self.expect_string("responsibility text").text
            self.expect_keyword("for")
            goal_id = self.expect_ident("goal identifier").text
            responsibilities.append(Responsibility(text=text, goal_id=goal_id))
        while self.at_keyword("constraint"):
            self.advance()
            constraints.append(self.expect_string("constraint text").text)
        if not self.at_punct("}"):
            self.fail("'responsibility', 'constraint' or '}'")
        self.advance()

        if name_tok.text in builder.ids["role"]:
            self.error("a unique role identifier", name_tok)
            return
        builder.ids["role"].add(name_tok.text)
        builder.roles.append(
            RoleDef(
                role_id=name_tok.text,
                description=description,
                responsibilities=tuple(responsibilities),
                constraints=tuple(constraints),
                span=self.span_from(start),
            )
        )

    def org_block(self, builder: _PhaseBuilder) -> None:
        self.expect_keyword("organisation")
        self.expect_punct("{")
        while True:
            tok = self.peek()
            if tok.kind is _Tok.PUNCT and tok.text == "}":
                self.advance()
                return
            if tok.kind is _Tok.EOF:
                self.fail("a role identifier or '}'")
            left_tok = self.expect_ident("a role identifier or '}'")
            start = left_tok
            if self.at_keyword("controls"):
                kind = OrgKind.CONTROLS
            elif self.at_keyword("peer"):
                kind = OrgKind.PEER
            else:
                self.fail("'controls' or 'peer'")
            self.advance()
            right_tok = self.expect_ident("role identifier")
            if left_tok.text == right_tok.text:
                self.error("two distinct role identifiers", right_tok)
                continue
            relation = OrgRelation(
                kind=kind,
                left=left_tok.text,
                right=right_tok.text,
                span=self.span_from(start),
            )
            # Exact duplicates (after peer normalization) collapse silently.
            if not any(
                r.kind is relation.kind and r.left == relation.left and r.right == relation.right
                for r in builder.organisation
            ):
                builder.organisation.append(relation)

    def inter_decl(self, builder: _PhaseBuilder) -> None:
        start = self.expect_keyword("interaction")
        name_tok = self.expect_ident("interaction identifier")
        self.expect_keyword("pursues")
        goal_id = self.expect_ident("goal identifier").text
        self.expect_punct("{")
        self.expect_keyword("participants")
        participant_toks = [self.expect_ident("role identifier")]
        self.expect_punct(",")
        participant_toks.append(self.expect_ident("role identifier"))
        while self.at_punct(","):
            self.advance()
            participant_toks.append(self.expect_ident("role identifier"))
        self.expect_punct("}")

        ok = True
        if name_tok.text in builder.ids["interaction"]:
            self.error("a unique interaction identifier", name_tok)
            ok = False
        builder.ids["interaction"].add(name_tok.text)
        seen: set[str] = set()
        for tok in participant_toks:
            if tok.text in seen:
                self.error("distinct participant identifiers", tok)
                ok = False
            seen.add(tok.text)
        if not ok:
            return
        builder.interactions.append(
            Interaction(
                interaction_id=name_tok.text,
                goal_id=goal_id,
                participants=tuple(t.text for t in participant_toks),
                span=self.span_from(start),
            )
        )

    def env_block(self, builder: _PhaseBuilder) -> None:
        self.expect_keyword("environment")
        self.expect_punct("{")
        while True:
            tok = self.peek()
            if tok.kind is _Tok.PUNCT and tok.text == "}":
                self.advance()
                return
            if not self.at_keyword("resource"):
                self.fail("'resource' or '}'")
            start = self.advance()
            name_tok = self.expect_ident("resource identifier")
            description = ""
            if self.peek().kind is _Tok.STRING:
                description = self.advance().text
            if name_tok.text in builder.ids["resource"]:
                self.error("a unique resource identifier", name_tok)
                continue
            builder.ids["resource"].add(name_tok.text)
            builder.environment.append(
                EnvEntity(
                    entity_id=name_tok.text,
                    description=description,
                    span=self.span_from(start),
                )
            )

    def agent_decl(self, builder: _PhaseBuilder) -> None:
        start = self.expect_keyword("agent")
        name_tok = self.expect_ident("agent identifier")
        description = self.expect_string("agent description string").text
        self.expect_keyword("plays")
        plays = [self.expect_ident("role identifier").text]
        while self.at_punct(","):
            self.advance()
            plays.append(self.expect_ident("role identifier").text)
        self.expect_punct("{")

        triggers: list[TriggerDef] = []
        trigger_ids: set[str] = set()
        activities: list[ActivityDef] = []
        activity_ids: set[str] = set()
        ok = True
        while self.at_keyword("trigger"):
            self.advance()
            trig_tok = self.expect_ident("trigger identifier")
            text = self.expect_string("trigger description string").text
            if trig_tok.text in trigger_ids:
                self.error("a unique trigger identifier within the agent", trig_tok)
                ok = False
                continue
            trigger_ids.add(trig_tok.text)
            triggers.append(TriggerDef(trigger_id=trig_tok.text, description=text))
        while self.at_keyword("activity"):
            self.advance()
            act_tok = self.expect_ident("activity identifier")
            text = self.expect_string("activity description string").text
            if act_tok.text in activity_ids:
                self.error("a unique activity identifier within the agent", act_tok)
                ok = False
                continue
            activity_ids.add(act_tok.text)
            activities.append(ActivityDef(activity_id=act_tok.text, description=text))
        if not self.at_punct("}"):
            self.fail("'trigger', 'activity' or '}'")
        self.advance()

        if name_tok.text in builder.ids["agent"]:
            self.error("a unique agent identifier", name_tok)
            ok = False
        builder.ids["agent"].add(name_tok.text)
        if not ok:
            return
        builder.agents.append(
            AgentDef(
                agent_id=name_tok.text,
                description=description,
                plays=tuple(plays),
                triggers=tuple(triggers),
                activities=tuple(activities),
                span=self.span_from(start),
            )
        )

    def scen_decl(self, builder: _PhaseBuilder) -> None:
        start = self.expect_keyword("scenario")
        name_tok = self.expect_ident("scenario identifier")
        self.expect_keyword("achieves")
        goal_id = self.expect_ident("goal identifier").text
        self.expect_punct("{")
        self.expect_keyword("pre")
        precondition = self.expect_string("precondition string").text
        steps: list[ScenarioStep] = []
        while self.at_keyword("step"):
            step = self.step_decl()
            if step is not None:
                steps.append(step)
        if not steps:
            self.fail("'step'")
        self.expect_keyword("post")
        postcondition = self.expect_string("postcondition string").text
        self.expect_punct("}")

        if name_tok.text in builder.ids["scenario"]:
            self.error("a unique scenario identifier", name_tok)
            return
        builder.ids["scenario"].add(name_tok.text)
        builder.scenarios.append(
            Scenario(
                scenario_id=name_tok.text,
                goal_id=goal_id,
                precondition=precondition,
                postcondition=postcondition,
                steps=tuple(steps),
                span=self.span_from(start),
            )
        )

    def step_decl(self) -> ScenarioStep | None:
        start = self.expect_keyword("step")
        activity_id = self.expect_ident("activity identifier").text
        self.expect_keyword("by")
        actor = self.expect_ident("role identifier").text
        resources: list[str] = []
        if self.at_keyword("uses"):
            self.advance()
            resources.append(self.expect_ident("resource identifier").text)
            while self.at_punct(","):
                self.advance()
                resources.append(self.expect_ident("resource identifier").text)
        self.expect_punct("[")
        mode_tok = self.peek()
        mode_name = mode_tok.text if mode_tok.kind is _Tok.KEYWORD else ""
        if mode_name not in STEP_MODE_BY_NAME:
            self.fail("'sequential', 'parallel' or 'interleaved'")
        self.advance()
        self.expect_punct("]")
        return ScenarioStep(
            activity_id=activity_id,
            actor_role_id=actor,
            resource_ids=tuple(resources),
            mode=STEP_MODE_BY_NAME[mode_name],
            span=self.span_from(start),
        )


def parse_plan(text: str) -> Plan:
    """Parse DSL text into a plan.

    Raises :class:`PlanParseError` carrying every error found in the pass;
    never raises anything else, for arbitrary input.
    """
    tokens, lex_errors = _lex(text)
    parser = _Parser(tokens, lex_errors)
    try:
        plan = parser.parse()
    except _Resync:  # defensive: recovery should consume these internally
        plan = None
    if parser.errors or plan is None:
        errors = tuple(sorted(parser.errors, key=lambda e: (e.span.start, e.span.end)))
        raise PlanParseError(errors if errors else (ParseError(
            SourceSpan(0, 0, 1, 1), "a plan", "unparseable input"),))
    return plan


def quote(text: str) -> str:
    """Quote a string the way the DSL and the record formats expect."""
    if "\n" in text or "\r" in text:
        raise ValueError("strings may not contain line breaks")
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _block(head: str, body: list[str]) -> list[str]:
    if not body:
        return [head + " {}"]
    return [head + " {", *body, "}"]


def _indent(lines: list[str]) -> list[str]:
    return ["  " + line for line in lines]


def _goal_lines(goal: GoalNode) -> list[str]:
    body: list[str] = [f"role {rid}" for rid in goal.role_ids]
    for sub in goal.subgoals:
        body.extend(_goal_lines(sub))
    return _block(f"goal {goal.goal_id} {quote(goal.description)}", _indent(body))


def _phase_lines(models: PhaseModels) -> list[str]:
    body: list[str] = []
    for goal in models.goals:
        body.extend(_goal_lines(goal))
    for role in models.roles:
        role_body = [
            f"responsibility {quote(r.text)} for {r.goal_id}" for r in role.responsibilities
        ] + [f"constraint {quote(c)}" for c in role.constraints]
        body.extend(_block(f"role {role.role_id} {quote(role.description)}", _indent(role_body)))
    if models.organisation:
        rel_lines = [f"{r.left} {r.kind.value} {r.right}" for r in models.organisation]
        body.extend(_block("organisation", _indent(rel_lines)))
    for interaction in models.interactions:
        body.extend(
            _block(
                f"interaction {interaction.interaction_id} pursues {interaction.goal_id}",
                _indent(["participants " + ", ".join(interaction.participants)]),
            )
        )
    if models.environment:
        res_lines = []
        for entity in models.environment:
            if entity.description:
                res_lines.append(f"resource {entity.entity_id} {quote(entity.description)}")
            else:
                res_lines.append(f"resource {entity.entity_id}")
        body.extend(_block("environment", _indent(res_lines)))
    for agent in models.agents:
        agent_body = [
            f"trigger {t.trigger_id} {quote(t.description)}" for t in agent.triggers
        ] + [f"activity {a.activity_id} {quote(a.description)}" for a in agent.activities]
        head = f"agent {agent.agent_id} {quote(agent.description)} plays " + ", ".join(agent.plays)
        body.extend(_block(head, _indent(agent_body)))
    for scenario in models.scenarios:
        scen_body = [f"pre {quote(scenario.precondition)}"]
        for step in scenario.steps:
            line = f"step {step.activity_id} by {step.actor_role_id}"
            if step.resource_ids:
                line += " uses " + ", ".join(step.resource_ids)
            line += f" [{step.mode.value}]"
            scen_body.append(line)
        scen_body.append(f"post {quote(scenario.postcondition)}")
        body.extend(
            _block(f"scenario {scenario.scenario_id} achieves {scenario.goal_id}", _indent(scen_body))
        )
    return body


def render_plan(plan: Plan) -> str:
    """Render a plan to canonical DSL text.

    Two-space indentation, one statement per line, phases in enum order,
    elements in declaration order, sections grouped per template, LF line
    endings. ``parse_plan`` of the result reproduces the plan exactly.
    """
    lines = [f"plan {quote(plan.title)} as {plan.plan_id} {{"]
    for phase, models in plan.phases_in_order():
        lines.extend(_indent(_block(f"phase {phase.value}", _indent(_phase_lines(models)))))
    lines.append("}")
    return "\n".join(lines) + "\n"

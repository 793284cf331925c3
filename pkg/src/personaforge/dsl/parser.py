"""Recursive-descent parsers for the four textual model syntaxes.

Parsing reports problems as diagnostics rather than exceptions. A file that
produces any error diagnostic yields no model value; reference-level checks
(dangling targets, unreachable states, ...) are deliberately left to the
validator so that structurally complete but semantically broken models can
still be loaded and inspected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Generic, Optional, TypeVar

from ..model import (
    ABBREVIATIONS,
    ABILITY_KINDS,
    AGE_GROUPS,
    COMPLEXITIES,
    INTENT_CLASSIFIERS,
    MODALITIES,
    PLATFORMS,
    RESPONSE_TIMINGS,
    SENTENCE_LENGTHS,
    STYLES,
    AbilityConstraint,
    Action,
    AgentConfiguration,
    AgentModel,
    BehaviorConfig,
    Body,
    Condition,
    ContentConfig,
    Intent,
    ModalityConfig,
    PersonalizationMapping,
    PreferenceTag,
    PresentationConfig,
    SpeechStyle,
    State,
    TechnologyConfig,
    TextStyle,
    Transition,
    UserProfile,
)
from .lexer import LexicalError, SourceSpan, Token, lex

T = TypeVar("T")

# Primary subtag of letters with an optional region/script subtag.
LANGUAGE_TAG_RE = re.compile(r"^[A-Za-z]{2,8}(-[A-Za-z0-9]{2,8})?$")


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"


@dataclass
class ParseResult(Generic[T]):
    """Outcome of a parse: a model value, or diagnostics explaining why not."""

    model: Optional[T]
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None and not self.errors

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


class _SyntaxError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span


class _Parser:
    def __init__(self, source: str, file: str):
        self.file = file
        self.diagnostics: list[ParseDiagnostic] = []
        try:
            self.tokens = lex(source, file)
        except LexicalError as exc:
            self.tokens = [Token("EOF", "", None, exc.span)]
            self.error(str(exc), exc.span)
        self.pos = 0

    # -- token plumbing -----------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.current
        if token.type != "EOF":
            self.pos += 1
        return token

    def check(self, type_: str, text: Optional[str] = None) -> bool:
        token = self.current
        if token.type != type_:
            return False
        return text is None or token.text == text

    def accept(self, type_: str, text: Optional[str] = None) -> Optional[Token]:
        if self.check(type_, text):
            return self.advance()
        return None

    def expect(self, type_: str, what: str, text: Optional[str] = None) -> Token:
        token = self.accept(type_, text)
        if token is None:
            raise _SyntaxError(
                f"expected {what}, found {self.current.text or 'end of input'!r}",
                self.current.span,
            )
        return token

    def error(self, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(ParseDiagnostic("error", message, span))

    # -- shared statement helpers -------------------------------------------

    def parse_string_list(self) -> tuple[str, ...]:
        self.expect("LBRACKET", "'['")
        items: list[str] = []
        if not self.check("RBRACKET"):
            while True:
                items.append(self.expect("STRING", "a string").value)  # type: ignore[arg-type]
                if not self.accept("COMMA"):
                    break
        self.expect("RBRACKET", "']'")
        return tuple(items)

    def parse_ident_list(self) -> tuple[Token, ...]:
        self.expect("LBRACKET", "'['")
        items: list[Token] = []
        if not self.check("RBRACKET"):
            while True:
                items.append(self.expect("IDENT", "an identifier"))
                if not self.accept("COMMA"):
                    break
        self.expect("RBRACKET", "']'")
        return tuple(items)

    def expect_enum(self, allowed: tuple[str, ...], what: str) -> str:
        token = self.expect("IDENT", what)
        if token.text not in allowed:
            raise _SyntaxError(
                f"invalid {what} {token.text!r}, expected one of: "
                + ", ".join(allowed),
                token.span,
            )
        return token.text

    def expect_bool(self, what: str) -> bool:
        token = self.expect("IDENT", what)
        if token.text not in ("true", "false"):
            raise _SyntaxError(
                f"invalid {what} {token.text!r}, expected true or false", token.span
            )
        return token.text == "true"

    def at_end(self) -> bool:
        return self.current.type == "EOF"


# ---------------------------------------------------------------------------
# Agent files


def parse_agent(source: str, file: str = "<input>") -> ParseResult[AgentModel]:
    parser = _Parser(source, file)
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    try:
        model = _parse_agent(parser)
    except _SyntaxError as exc:
        parser.error(exc.message, exc.span)
        model = None
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    return ParseResult(model, parser.diagnostics)


def _parse_agent(parser: _Parser) -> AgentModel:
    header = parser.accept("IDENT", "agent")
    if header is None:
        raise _SyntaxError("expected 'agent' header", parser.current.span)
    agent_id = parser.expect("IDENT", "agent name").text
    language = "en"
    if parser.accept("IDENT", "lang"):
        language = parser.expect("STRING", "a language tag").value  # type: ignore[assignment]
    parser.expect("LBRACE", "'{'")

    name = agent_id
    if parser.check("IDENT", "name"):
        parser.advance()
        name = parser.expect("STRING", "a display name").value  # type: ignore[assignment]

    intents: list[Intent] = []
    states: list[State] = []
    initial: Optional[str] = None
    seen_intents: dict[str, SourceSpan] = {}
    seen_states: dict[str, SourceSpan] = {}
    fallback_span: Optional[SourceSpan] = None

    while not parser.check("RBRACE"):
        if parser.check("IDENT", "intent"):
            intent, span = _parse_intent(parser)
            if intent.id in seen_intents:
                parser.error(f"duplicate intent id: {intent.id!r}", span)
            seen_intents[intent.id] = span
            if intent.is_fallback:
                if fallback_span is not None:
                    parser.error("more than one fallback intent declared", span)
                fallback_span = span
            intents.append(intent)
        elif parser.check("IDENT", "state"):
            state, is_initial, span = _parse_state(parser)
            if state.id in seen_states:
                parser.error(f"duplicate state id: {state.id!r}", span)
            seen_states[state.id] = span
            if is_initial:
                if initial is not None:
                    parser.error(
                        f"duplicate 'initial' marker on state {state.id!r}", span
                    )
                else:
                    initial = state.id
            states.append(state)
        else:
            raise _SyntaxError(
                "expected 'intent', 'state' or '}'", parser.current.span
            )
    closing = parser.expect("RBRACE", "'}'")
    if not parser.at_end():
        raise _SyntaxError("unexpected input after '}'", parser.current.span)

    if not states:
        parser.error("agent declares no states", closing.span)
    elif initial is None:
        parser.error("no state marked 'initial'", closing.span)

    return AgentModel(
        id=agent_id,
        name=name,
        states=tuple(states),
        intents=tuple(intents),
        initial_state=initial or "",
        language=language,
    )


def _parse_intent(parser: _Parser) -> tuple[Intent, SourceSpan]:
    parser.expect("IDENT", "'intent'", "intent")
    name_token = parser.expect("IDENT", "an intent id")
    if parser.accept("IDENT", "fallback"):
        return Intent(name_token.text, (), True), name_token.span
    parser.expect("LBRACE", "'{'")
    phrases: list[str] = []
    while not parser.check("RBRACE"):
        phrases.append(parser.expect("STRING", "a training phrase").value)  # type: ignore[arg-type]
    parser.expect("RBRACE", "'}'")
    if not phrases:
        parser.error(
            f"intent {name_token.text!r} declares no training phrases",
            name_token.span,
        )
    return Intent(name_token.text, tuple(phrases), False), name_token.span


def _parse_state(parser: _Parser) -> tuple[State, bool, SourceSpan]:
    parser.expect("IDENT", "'state'", "state")
    name_token = parser.expect("IDENT", "a state id")
    is_initial = parser.accept("IDENT", "initial") is not None
    parser.expect("LBRACE", "'{'")
    actions: list[Action] = []
    transitions: list[Transition] = []
    while not parser.check("RBRACE"):
        if parser.check("IDENT", "say"):
            parser.advance()
            text = parser.expect("STRING", "a response text").value
            actions.append(Action("predefined_response", text=text))  # type: ignore[arg-type]
        elif parser.check("IDENT", "llm") or parser.check("IDENT", "rag"):
            kind_token = parser.advance()
            instruction = ""
            if parser.check("STRING"):
                instruction = parser.advance().value  # type: ignore[assignment]
            kind = "llm_response" if kind_token.text == "llm" else "rag_response"
            actions.append(Action(kind, instruction=instruction))
        elif parser.check("IDENT", "on"):
            parser.advance()
            intent = parser.expect("IDENT", "an intent id").text
            parser.expect("ARROW", "'->'")
            target = parser.expect("IDENT", "a state id").text
            transitions.append(
                Transition(name_token.text, target, Condition(intent))
            )
        elif parser.check("IDENT", "auto"):
            parser.advance()
            parser.expect("ARROW", "'->'")
            target = parser.expect("IDENT", "a state id").text
            transitions.append(Transition(name_token.text, target, None))
        else:
            raise _SyntaxError(
                "expected 'say', 'llm', 'rag', 'on', 'auto' or '}'",
                parser.current.span,
            )
    parser.expect("RBRACE", "'}'")
    state = State(name_token.text, Body(tuple(actions)), tuple(transitions))
    return state, is_initial, name_token.span


# ---------------------------------------------------------------------------
# Profile files


def parse_profile(source: str, file: str = "<input>") -> ParseResult[UserProfile]:
    parser = _Parser(source, file)
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    try:
        profile = _parse_profile(parser)
    except _SyntaxError as exc:
        parser.error(exc.message, exc.span)
        profile = None
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    return ParseResult(profile, parser.diagnostics)


def _check_language_tag(parser: _Parser, tag: str, span: SourceSpan) -> None:
    if not LANGUAGE_TAG_RE.match(tag):
        parser.error(f"malformed language tag: {tag!r}", span)


def _parse_profile(parser: _Parser) -> UserProfile:
    header = parser.accept("IDENT", "profile")
    if header is None:
        raise _SyntaxError("expected 'profile' header", parser.current.span)
    profile_id = parser.expect("IDENT", "a profile id").text
    parser.expect("LBRACE", "'{'")

    fields: dict[str, object] = {}
    abilities: list[AbilityConstraint] = []
    preferences: list[PreferenceTag] = []
    seen_abilities: dict[str, SourceSpan] = {}

    while not parser.check("RBRACE"):
        if parser.check("IDENT", "ability"):
            ability, span = _parse_ability(parser)
            if ability.id in seen_abilities:
                parser.error(f"duplicate ability id: {ability.id!r}", span)
            seen_abilities[ability.id] = span
            abilities.append(ability)
            continue
        if parser.check("IDENT", "preference"):
            parser.advance()
            key = parser.expect("IDENT", "a preference key").text
            parser.expect("EQUALS", "'='")
            value = parser.expect("STRING", "a preference value").value
            preferences.append(PreferenceTag(key, value))  # type: ignore[arg-type]
            continue
        key_token = parser.expect("IDENT", "a profile attribute")
        parser.expect("EQUALS", "'='")
        key = key_token.text
        if key == "display_name":
            fields[key] = parser.expect("STRING", "a display name").value
        elif key == "age_group":
            fields[key] = parser.expect_enum(AGE_GROUPS, "age group")
        elif key == "native_language":
            token = parser.expect("STRING", "a language tag")
            _check_language_tag(parser, token.value, token.span)  # type: ignore[arg-type]
            fields[key] = token.value
        elif key == "preferred_languages":
            start = parser.current.span
            tags = parser.parse_string_list()
            for tag in tags:
                _check_language_tag(parser, tag, start)
            fields[key] = tags
        elif key == "notes":
            fields[key] = parser.expect("STRING", "a notes text").value
        else:
            raise _SyntaxError(f"unknown profile attribute {key!r}", key_token.span)
    parser.expect("RBRACE", "'}'")
    if not parser.at_end():
        raise _SyntaxError("unexpected input after '}'", parser.current.span)

    return UserProfile(
        id=profile_id,
        display_name=fields.get("display_name", ""),  # type: ignore[arg-type]
        age_group=fields.get("age_group", "unspecified"),  # type: ignore[arg-type]
        native_language=fields.get("native_language", ""),  # type: ignore[arg-type]
        preferred_languages=fields.get("preferred_languages", ()),  # type: ignore[arg-type]
        abilities=tuple(abilities),
        preferences=tuple(preferences),
        notes=fields.get("notes", ""),  # type: ignore[arg-type]
    )


def _parse_ability(parser: _Parser) -> tuple[AbilityConstraint, SourceSpan]:
    parser.expect("IDENT", "'ability'", "ability")
    name_token = parser.expect("IDENT", "an ability id")
    parser.expect("LBRACE", "'{'")
    kind = "other"
    description = ""
    affects: tuple[str, ...] = ()
    excludes: tuple[str, ...] = ()
    while not parser.check("RBRACE"):
        key_token = parser.expect("IDENT", "an ability attribute")
        parser.expect("EQUALS", "'='")
        if key_token.text == "kind":
            kind = parser.expect_enum(ABILITY_KINDS, "ability kind")
        elif key_token.text == "description":
            description = parser.expect("STRING", "a description").value  # type: ignore[assignment]
        elif key_token.text == "affects":
            affects = parser.parse_string_list()
        elif key_token.text == "excludes":
            excludes = parser.parse_string_list()
        else:
            raise _SyntaxError(
                f"unknown ability attribute {key_token.text!r}", key_token.span
            )
    parser.expect("RBRACE", "'}'")
    if kind != "other" and not affects:
        parser.error(
            f"ability {name_token.text!r} of kind {kind!r} lists no affected "
            "capabilities",
            name_token.span,
        )
    return (
        AbilityConstraint(name_token.text, kind, description, affects, excludes),
        name_token.span,
    )


# ---------------------------------------------------------------------------
# Configuration files


def parse_configuration(
    source: str, file: str = "<input>"
) -> ParseResult[AgentConfiguration]:
    parser = _Parser(source, file)
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    try:
        configuration = _parse_configuration(parser)
    except _SyntaxError as exc:
        parser.error(exc.message, exc.span)
        configuration = None
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    return ParseResult(configuration, parser.diagnostics)


def _parse_configuration(parser: _Parser) -> AgentConfiguration:
    header = parser.accept("IDENT", "config")
    if header is None:
        raise _SyntaxError("expected 'config' header", parser.current.span)
    header_span = parser.current.span
    config_id = parser.expect("IDENT", "a configuration id").text
    parser.expect("LBRACE", "'{'")

    presentation = PresentationConfig()
    behavior = BehaviorConfig()
    modality = ModalityConfig()
    content = ContentConfig()
    technology = TechnologyConfig()
    seen_blocks: set[str] = set()

    while not parser.check("RBRACE"):
        block_token = parser.expect("IDENT", "a configuration block")
        block = block_token.text
        if block in seen_blocks:
            parser.error(f"duplicate {block!r} block", block_token.span)
        seen_blocks.add(block)
        if block == "presentation":
            presentation = _parse_presentation(parser)
        elif block == "behavior":
            behavior = _parse_behavior(parser)
        elif block == "modality":
            modality = _parse_modality(parser)
        elif block == "content":
            content = _parse_content(parser)
        elif block == "technology":
            technology = _parse_technology(parser)
        else:
            raise _SyntaxError(
                f"unknown configuration block {block!r}; expected presentation, "
                "behavior, modality, content or technology",
                block_token.span,
            )
    parser.expect("RBRACE", "'}'")
    if not parser.at_end():
        raise _SyntaxError("unexpected input after '}'", parser.current.span)

    if content.verify_with_second_llm and not content.adapt_to_user_profile:
        parser.error(
            "verify_with_second_llm requires adapt_to_user_profile", header_span
        )
    if "speech" in modality.output and not technology.text2speech:
        parser.error(
            "output modality includes speech but no text2speech adapter is set",
            header_span,
        )

    return AgentConfiguration(
        id=config_id,
        presentation=presentation,
        behavior=behavior,
        modality=modality,
        content=content,
        technology=technology,
    )


def _parse_presentation(parser: _Parser) -> PresentationConfig:
    parser.expect("LBRACE", "'{'")
    values: dict[str, object] = {}
    text_style = {"font_scale": 1.0, "high_contrast": False}
    speech_style = {"voice": "default", "speed": 1.0}
    while not parser.check("RBRACE"):
        key_token = parser.expect("IDENT", "a presentation setting")
        parser.expect("EQUALS", "'='")
        key = key_token.text
        if key == "language":
            token = parser.expect("STRING", "a language tag")
            _check_language_tag(parser, token.value, token.span)  # type: ignore[arg-type]
            values[key] = token.value
        elif key == "style":
            values[key] = parser.expect_enum(STYLES, "style")
        elif key == "sentence_length":
            values[key] = parser.expect_enum(SENTENCE_LENGTHS, "sentence length")
        elif key == "abbreviations":
            values[key] = parser.expect_enum(ABBREVIATIONS, "abbreviations setting")
        elif key == "language_complexity":
            values[key] = parser.expect_enum(COMPLEXITIES, "language complexity")
        elif key == "font_scale":
            token = parser.expect("NUMBER", "a font scale")
            if token.value < 1.0:  # type: ignore[operator]
                parser.error("font_scale must be >= 1.0", token.span)
            text_style["font_scale"] = token.value
        elif key == "high_contrast":
            text_style["high_contrast"] = parser.expect_bool("high_contrast")
        elif key == "voice":
            speech_style["voice"] = parser.expect("STRING", "a voice tag").value
        elif key == "voice_speed":
            token = parser.expect("NUMBER", "a voice speed")
            if not 0.5 <= token.value <= 2.0:  # type: ignore[operator]
                parser.error("voice_speed must be within [0.5, 2.0]", token.span)
            speech_style["speed"] = token.value
        elif key == "avatar":
            values[key] = parser.expect("STRING", "an asset reference").value
        else:
            raise _SyntaxError(
                f"unknown presentation setting {key!r}", key_token.span
            )
    parser.expect("RBRACE", "'}'")
    return PresentationConfig(
        language=values.get("language", ""),  # type: ignore[arg-type]
        style=values.get("style", "unchanged"),  # type: ignore[arg-type]
        sentence_length=values.get("sentence_length", "unchanged"),  # type: ignore[arg-type]
        abbreviations=values.get("abbreviations", "unchanged"),  # type: ignore[arg-type]
        language_complexity=values.get("language_complexity", "unchanged"),  # type: ignore[arg-type]
        text_style=TextStyle(**text_style),  # type: ignore[arg-type]
        speech_style=SpeechStyle(**speech_style),  # type: ignore[arg-type]
        avatar=values.get("avatar", ""),  # type: ignore[arg-type]
    )


def _parse_behavior(parser: _Parser) -> BehaviorConfig:
    parser.expect("LBRACE", "'{'")
    timing = "instant"
    while not parser.check("RBRACE"):
        key_token = parser.expect("IDENT", "a behavior setting")
        parser.expect("EQUALS", "'='")
        if key_token.text == "response_timing":
            timing = parser.expect_enum(RESPONSE_TIMINGS, "response timing")
        else:
            raise _SyntaxError(
                f"unknown behavior setting {key_token.text!r}", key_token.span
            )
    parser.expect("RBRACE", "'}'")
    return BehaviorConfig(response_timing=timing)


def _parse_modality_set(parser: _Parser, what: str) -> tuple[str, ...]:
    tokens = parser.parse_ident_list()
    seen: list[str] = []
    for token in tokens:
        if token.text not in MODALITIES:
            raise _SyntaxError(
                f"invalid modality {token.text!r}, expected one of: "
                + ", ".join(MODALITIES),
                token.span,
            )
        if token.text not in seen:
            seen.append(token.text)
    if not seen:
        parser.error(f"{what} modalities must be non-empty", parser.current.span)
    # canonical order keeps serialization and equality stable
    return tuple(m for m in MODALITIES if m in seen)


def _parse_modality(parser: _Parser) -> ModalityConfig:
    parser.expect("LBRACE", "'{'")
    input_ = ("text",)
    output = ("text",)
    while not parser.check("RBRACE"):
        key_token = parser.expect("IDENT", "a modality setting")
        parser.expect("EQUALS", "'='")
        if key_token.text == "input":
            input_ = _parse_modality_set(parser, "input")
        elif key_token.text == "output":
            output = _parse_modality_set(parser, "output")
        else:
            raise _SyntaxError(
                f"unknown modality setting {key_token.text!r}", key_token.span
            )
    parser.expect("RBRACE", "'}'")
    return ModalityConfig(input=input_, output=output)


def _parse_content(parser: _Parser) -> ContentConfig:
    parser.expect("LBRACE", "'{'")
    adapt = False
    verify = False
    while not parser.check("RBRACE"):
        key_token = parser.expect("IDENT", "a content setting")
        parser.expect("EQUALS", "'='")
        if key_token.text == "adapt_to_user_profile":
            adapt = parser.expect_bool("adapt_to_user_profile")
        elif key_token.text == "verify_with_second_llm":
            verify = parser.expect_bool("verify_with_second_llm")
        else:
            raise _SyntaxError(
                f"unknown content setting {key_token.text!r}", key_token.span
            )
    parser.expect("RBRACE", "'}'")
    return ContentConfig(adapt_to_user_profile=adapt, verify_with_second_llm=verify)


def _parse_technology(parser: _Parser) -> TechnologyConfig:
    parser.expect("LBRACE", "'{'")
    values: dict[str, object] = {}
    while not parser.check("RBRACE"):
        key_token = parser.expect("IDENT", "a technology setting")
        parser.expect("EQUALS", "'='")
        key = key_token.text
        if key == "intent_classifier":
            values[key] = parser.expect_enum(INTENT_CLASSIFIERS, "intent classifier")
        elif key == "llm_endpoint":
            values[key] = parser.expect("STRING", "an adapter reference").value
        elif key == "rag_db":
            values[key] = parser.expect("STRING", "a source reference").value
        elif key == "platform":
            values[key] = parser.expect_enum(PLATFORMS, "platform")
        elif key == "text2speech":
            values[key] = parser.expect("STRING", "an adapter reference").value
        else:
            raise _SyntaxError(
                f"unknown technology setting {key!r}", key_token.span
            )
    parser.expect("RBRACE", "'}'")
    return TechnologyConfig(
        intent_classifier=values.get("intent_classifier", "keyword"),  # type: ignore[arg-type]
        llm_endpoint=values.get("llm_endpoint", "default"),  # type: ignore[arg-type]
        rag_db=values.get("rag_db", ""),  # type: ignore[arg-type]
        platform=values.get("platform", "http_chat"),  # type: ignore[arg-type]
        text2speech=values.get("text2speech", ""),  # type: ignore[arg-type]
    )


# ---------------------------------------------------------------------------
# Mapping files


def parse_mapping_file(
    source: str, file: str = "<input>"
) -> ParseResult[tuple[PersonalizationMapping, ...]]:
    parser = _Parser(source, file)
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    mappings: list[PersonalizationMapping] = []
    try:
        while not parser.at_end():
            header = parser.accept("IDENT", "map")
            if header is None:
                raise _SyntaxError("expected 'map' header", parser.current.span)
            mappings.append(_parse_mapping_block(parser))
    except _SyntaxError as exc:
        parser.error(exc.message, exc.span)
    if parser.diagnostics:
        return ParseResult(None, parser.diagnostics)
    return ParseResult(tuple(mappings), parser.diagnostics)


def _parse_mapping_block(parser: _Parser) -> PersonalizationMapping:
    open_token = parser.expect("LBRACE", "'{'")
    values: dict[str, str] = {}
    while not parser.check("RBRACE"):
        key_token = parser.expect("IDENT", "a mapping attribute")
        parser.expect("EQUALS", "'='")
        if key_token.text in ("user_profile", "agent", "configuration"):
            if key_token.text in values:
                parser.error(
                    f"duplicate mapping attribute {key_token.text!r}", key_token.span
                )
            values[key_token.text] = parser.expect("IDENT", "an identifier").text
        else:
            raise _SyntaxError(
                f"unknown mapping attribute {key_token.text!r}", key_token.span
            )
    parser.expect("RBRACE", "'}'")
    for required in ("user_profile", "agent", "configuration"):
        if required not in values:
            parser.error(f"mapping is missing {required!r}", open_token.span)
            values[required] = ""
    return PersonalizationMapping(
        user_profile=values["user_profile"],
        agent=values["agent"],
        configuration=values["configuration"],
    )

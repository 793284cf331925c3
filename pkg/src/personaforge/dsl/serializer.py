"""Canonical text rendering for the four model kinds.

Output is deterministic: fixed field order, one statement per line, two-space
indentation, defaults omitted. Re-parsing serialized text reproduces a
structurally equal model.
"""

from __future__ import annotations

from typing import Iterable, Union

from ..model import (
    AbilityConstraint,
    Action,
    AgentConfiguration,
    AgentModel,
    PersonalizationMapping,
    State,
    UserProfile,
)

Serializable = Union[
    AgentModel, UserProfile, AgentConfiguration, PersonalizationMapping
]

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def _quote(text: str) -> str:
    return '"' + "".join(_ESCAPES.get(ch, ch) for ch in text) + '"'


def _quote_list(items: Iterable[str]) -> str:
    return "[" + ", ".join(_quote(item) for item in items) + "]"


def _number(value: float) -> str:
    return repr(value)


def serialize(model: Serializable) -> str:
    """Render any of the four model kinds as canonical text."""
    if isinstance(model, AgentModel):
        return serialize_agent(model)
    if isinstance(model, UserProfile):
        return serialize_profile(model)
    if isinstance(model, AgentConfiguration):
        return serialize_configuration(model)
    if isinstance(model, PersonalizationMapping):
        return serialize_mapping(model)
    raise TypeError(f"cannot serialize {type(model).__name__}")


# ---------------------------------------------------------------------------
# Agents


def _action_line(action: Action) -> str:
    if action.kind == "predefined_response":
        return f"say {_quote(action.text)}"
    keyword = "llm" if action.kind == "llm_response" else "rag"
    if action.instruction:
        return f"{keyword} {_quote(action.instruction)}"
    return keyword


def _state_lines(state: State, initial: bool) -> list[str]:
    marker = " initial" if initial else ""
    lines = [f"  state {state.id}{marker} {{"]
    for action in state.body.actions:
        lines.append(f"    {_action_line(action)}")
    for transition in state.transitions:
        if transition.condition is None:
            lines.append(f"    auto -> {transition.target}")
        else:
            lines.append(
                f"    on {transition.condition.intent} -> {transition.target}"
            )
    lines.append("  }")
    return lines


def serialize_agent(model: AgentModel) -> str:
    lines = [f"agent {model.id} lang {_quote(model.language)} {{"]
    if model.name != model.id:
        lines.append(f"  name {_quote(model.name)}")
    for intent in model.intents:
        if intent.is_fallback:
            lines.append(f"  intent {intent.id} fallback")
        else:
            lines.append(f"  intent {intent.id} {{")
            for phrase in intent.training_phrases:
                lines.append(f"    {_quote(phrase)}")
            lines.append("  }")
    for state in model.states:
        lines.extend(_state_lines(state, state.id == model.initial_state))
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Profiles


def _ability_lines(ability: AbilityConstraint) -> list[str]:
    lines = [f"  ability {ability.id} {{", f"    kind = {ability.kind}"]
    if ability.description:
        lines.append(f"    description = {_quote(ability.description)}")
    if ability.affected_capabilities:
        lines.append(f"    affects = {_quote_list(ability.affected_capabilities)}")
    if ability.excludes_content:
        lines.append(f"    excludes = {_quote_list(ability.excludes_content)}")
    lines.append("  }")
    return lines


def serialize_profile(profile: UserProfile) -> str:
    lines = [f"profile {profile.id} {{"]
    if profile.display_name:
        lines.append(f"  display_name = {_quote(profile.display_name)}")
    if profile.age_group != "unspecified":
        lines.append(f"  age_group = {profile.age_group}")
    if profile.native_language:
        lines.append(f"  native_language = {_quote(profile.native_language)}")
    if profile.preferred_languages:
        lines.append(
            f"  preferred_languages = {_quote_list(profile.preferred_languages)}"
        )
    if profile.notes:
        lines.append(f"  notes = {_quote(profile.notes)}")
    for ability in profile.abilities:
        lines.extend(_ability_lines(ability))
    for preference in profile.preferences:
        lines.append(f"  preference {preference.key} = {_quote(preference.value)}")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Configurations


def serialize_configuration(config: AgentConfiguration) -> str:
    lines = [f"config {config.id} {{"]

    presentation: list[str] = []
    pres = config.presentation
    if pres.language:
        presentation.append(f"language = {_quote(pres.language)}")
    if pres.style != "unchanged":
        presentation.append(f"style = {pres.style}")
    if pres.sentence_length != "unchanged":
        presentation.append(f"sentence_length = {pres.sentence_length}")
    if pres.abbreviations != "unchanged":
        presentation.append(f"abbreviations = {pres.abbreviations}")
    if pres.language_complexity != "unchanged":
        presentation.append(f"language_complexity = {pres.language_complexity}")
    if pres.text_style.font_scale != 1.0:
        presentation.append(f"font_scale = {_number(pres.text_style.font_scale)}")
    if pres.text_style.high_contrast:
        presentation.append("high_contrast = true")
    if pres.speech_style.voice != "default":
        presentation.append(f"voice = {_quote(pres.speech_style.voice)}")
    if pres.speech_style.speed != 1.0:
        presentation.append(f"voice_speed = {_number(pres.speech_style.speed)}")
    if pres.avatar:
        presentation.append(f"avatar = {_quote(pres.avatar)}")

    behavior: list[str] = []
    if config.behavior.response_timing != "instant":
        behavior.append(f"response_timing = {config.behavior.response_timing}")

    modality: list[str] = []
    if config.modality.input != ("text",):
        modality.append(f"input = [{', '.join(config.modality.input)}]")
    if config.modality.output != ("text",):
        modality.append(f"output = [{', '.join(config.modality.output)}]")

    content: list[str] = []
    if config.content.adapt_to_user_profile:
        content.append("adapt_to_user_profile = true")
    if config.content.verify_with_second_llm:
        content.append("verify_with_second_llm = true")

    technology: list[str] = []
    tech = config.technology
    if tech.intent_classifier != "keyword":
        technology.append(f"intent_classifier = {tech.intent_classifier}")
    if tech.llm_endpoint != "default":
        technology.append(f"llm_endpoint = {_quote(tech.llm_endpoint)}")
    if tech.rag_db:
        technology.append(f"rag_db = {_quote(tech.rag_db)}")
    if tech.platform != "http_chat":
        technology.append(f"platform = {tech.platform}")
    if tech.text2speech:
        technology.append(f"text2speech = {_quote(tech.text2speech)}")

    for block_name, entries in (
        ("presentation", presentation),
        ("behavior", behavior),
        ("modality", modality),
        ("content", content),
        ("technology", technology),
    ):
        if entries:
            lines.append(f"  {block_name} {{")
            lines.extend(f"    {entry}" for entry in entries)
            lines.append("  }")

    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Mappings


def serialize_mapping(mapping: PersonalizationMapping) -> str:
    return (
        "map {\n"
        f"  user_profile = {mapping.user_profile}\n"
        f"  agent = {mapping.agent}\n"
        f"  configuration = {mapping.configuration}\n"
        "}\n"
    )


def serialize_mapping_file(mappings: Iterable[PersonalizationMapping]) -> str:
    blocks = [serialize_mapping(mapping).rstrip("\n") for mapping in mappings]
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"

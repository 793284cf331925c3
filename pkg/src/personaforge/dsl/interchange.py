"""Structured JSON interchange for whole workspaces.

One schema-versioned document carries every model and mapping. The
per-model converters are also reused by the bundle format and audit logs.
"""

from __future__ import annotations

import json
from typing import Any

from ..errors import UnsupportedVersionError
from ..model import (
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
    ModelWorkspace,
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

SCHEMA_VERSION = "1"


# ---------------------------------------------------------------------------
# Model -> JSON


def profile_to_json(profile: UserProfile) -> dict[str, Any]:
    return {
        "id": profile.id,
        "display_name": profile.display_name,
        "age_group": profile.age_group,
        "native_language": profile.native_language,
        "preferred_languages": list(profile.preferred_languages),
        "abilities": [
            {
                "id": a.id,
                "kind": a.kind,
                "description": a.description,
                "affected_capabilities": list(a.affected_capabilities),
                "excludes_content": list(a.excludes_content),
            }
            for a in profile.abilities
        ],
        "preferences": [{"key": p.key, "value": p.value} for p in profile.preferences],
        "notes": profile.notes,
    }


def agent_to_json(model: AgentModel) -> dict[str, Any]:
    return {
        "id": model.id,
        "name": model.name,
        "language": model.language,
        "initial_state": model.initial_state,
        "intents": [
            {
                "id": intent.id,
                "training_phrases": list(intent.training_phrases),
                "is_fallback": intent.is_fallback,
            }
            for intent in model.intents
        ],
        "states": [
            {
                "id": state.id,
                "actions": [
                    {
                        "kind": action.kind,
                        "text": action.text,
                        "instruction": action.instruction,
                    }
                    for action in state.body.actions
                ],
                "transitions": [
                    {
                        "source": t.source,
                        "target": t.target,
                        "condition": (
                            None
                            if t.condition is None
                            else {"kind": t.condition.kind, "intent": t.condition.intent}
                        ),
                    }
                    for t in state.transitions
                ],
            }
            for state in model.states
        ],
    }


def configuration_to_json(config: AgentConfiguration) -> dict[str, Any]:
    return {
        "id": config.id,
        "presentation": {
            "language": config.presentation.language,
            "style": config.presentation.style,
            "sentence_length": config.presentation.sentence_length,
            "abbreviations": config.presentation.abbreviations,
            "language_complexity": config.presentation.language_complexity,
            "text_style": {
                "font_scale": config.presentation.text_style.font_scale,
                "high_contrast": config.presentation.text_style.high_contrast,
            },
            "speech_style": {
                "voice": config.presentation.speech_style.voice,
                "speed": config.presentation.speech_style.speed,
            },
            "avatar": config.presentation.avatar,
        },
        "behavior": {"response_timing": config.behavior.response_timing},
        "modality": {
            "input": list(config.modality.input),
            "output": list(config.modality.output),
        },
        "content": {
            "adapt_to_user_profile": config.content.adapt_to_user_profile,
            "verify_with_second_llm": config.content.verify_with_second_llm,
        },
        "technology": {
            "intent_classifier": config.technology.intent_classifier,
            "llm_endpoint": config.technology.llm_endpoint,
            "rag_db": config.technology.rag_db,
            "platform": config.technology.platform,
            "text2speech": config.technology.text2speech,
        },
    }


def mapping_to_json(mapping: PersonalizationMapping) -> dict[str, Any]:
    return {
        "user_profile": mapping.user_profile,
        "agent": mapping.agent,
        "configuration": mapping.configuration,
    }


# ---------------------------------------------------------------------------
# JSON -> Model


def profile_from_json(data: dict[str, Any]) -> UserProfile:
    return UserProfile(
        id=data["id"],
        display_name=data.get("display_name", ""),
        age_group=data.get("age_group", "unspecified"),
        native_language=data.get("native_language", ""),
        preferred_languages=tuple(data.get("preferred_languages", [])),
        abilities=tuple(
            AbilityConstraint(
                id=a["id"],
                kind=a.get("kind", "other"),
                description=a.get("description", ""),
                affected_capabilities=tuple(a.get("affected_capabilities", [])),
                excludes_content=tuple(a.get("excludes_content", [])),
            )
            for a in data.get("abilities", [])
        ),
        preferences=tuple(
            PreferenceTag(p["key"], p["value"]) for p in data.get("preferences", [])
        ),
        notes=data.get("notes", ""),
    )


def agent_from_json(data: dict[str, Any]) -> AgentModel:
    return AgentModel(
        id=data["id"],
        name=data.get("name", data["id"]),
        language=data.get("language", "en"),
        initial_state=data.get("initial_state", ""),
        intents=tuple(
            Intent(
                id=i["id"],
                training_phrases=tuple(i.get("training_phrases", [])),
                is_fallback=i.get("is_fallback", False),
            )
            for i in data.get("intents", [])
        ),
        states=tuple(
            State(
                id=s["id"],
                body=Body(
                    tuple(
                        Action(
                            kind=a["kind"],
                            text=a.get("text", ""),
                            instruction=a.get("instruction", ""),
                        )
                        for a in s.get("actions", [])
                    )
                ),
                transitions=tuple(
                    Transition(
                        source=t["source"],
                        target=t["target"],
                        condition=(
                            None
                            if t.get("condition") is None
                            else Condition(
                                intent=t["condition"]["intent"],
                                kind=t["condition"].get("kind", "intent_matched"),
                            )
                        ),
                    )
                    for t in s.get("transitions", [])
                ),
            )
            for s in data.get("states", [])
        ),
    )


def configuration_from_json(data: dict[str, Any]) -> AgentConfiguration:
    pres = data.get("presentation", {})
    text_style = pres.get("text_style", {})
    speech_style = pres.get("speech_style", {})
    modality = data.get("modality", {})
    content = data.get("content", {})
    tech = data.get("technology", {})
    return AgentConfiguration(
        id=data["id"],
        presentation=PresentationConfig(
            language=pres.get("language", ""),
            style=pres.get("style", "unchanged"),
            sentence_length=pres.get("sentence_length", "unchanged"),
            abbreviations=pres.get("abbreviations", "unchanged"),
            language_complexity=pres.get("language_complexity", "unchanged"),
            text_style=TextStyle(
                font_scale=text_style.get("font_scale", 1.0),
                high_contrast=text_style.get("high_contrast", False),
            ),
            speech_style=SpeechStyle(
                voice=speech_style.get("voice", "default"),
                speed=speech_style.get("speed", 1.0),
            ),
            avatar=pres.get("avatar", ""),
        ),
        behavior=BehaviorConfig(
            response_timing=data.get("behavior", {}).get("response_timing", "instant")
        ),
        modality=ModalityConfig(
            input=tuple(modality.get("input", ["text"])),
            output=tuple(modality.get("output", ["text"])),
        ),
        content=ContentConfig(
            adapt_to_user_profile=content.get("adapt_to_user_profile", False),
            verify_with_second_llm=content.get("verify_with_second_llm", False),
        ),
        technology=TechnologyConfig(
            intent_classifier=tech.get("intent_classifier", "keyword"),
            llm_endpoint=tech.get("llm_endpoint", "default"),
            rag_db=tech.get("rag_db", ""),
            platform=tech.get("platform", "http_chat"),
            text2speech=tech.get("text2speech", ""),
        ),
    )


def mapping_from_json(data: dict[str, Any]) -> PersonalizationMapping:
    return PersonalizationMapping(
        user_profile=data["user_profile"],
        agent=data["agent"],
        configuration=data["configuration"],
    )


# ---------------------------------------------------------------------------
# Workspace documents


def export_interchange(workspace: ModelWorkspace) -> str:
    """Render the whole workspace as one schema-versioned JSON document."""
    document = {
        "schema_version": SCHEMA_VERSION,
        "profiles": [profile_to_json(p) for p in workspace.profiles.values()],
        "agents": [agent_to_json(a) for a in workspace.agents.values()],
        "configurations": [
            configuration_to_json(c) for c in workspace.configurations.values()
        ],
        "mappings": [mapping_to_json(m) for m in workspace.mappings],
    }
    return json.dumps(document, indent=2) + "\n"


def import_interchange(text: str) -> ModelWorkspace:
    """Rebuild a workspace from an interchange document."""
    document = json.loads(text)
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnsupportedVersionError(
            f"unsupported interchange schema version: {version!r}"
        )
    workspace = ModelWorkspace()
    for data in document.get("profiles", []):
        workspace.profiles[data["id"]] = profile_from_json(data)
    for data in document.get("agents", []):
        workspace.agents[data["id"]] = agent_from_json(data)
    for data in document.get("configurations", []):
        workspace.configurations[data["id"]] = configuration_from_json(data)
    for data in document.get("mappings", []):
        workspace.mappings.append(mapping_from_json(data))
    return workspace

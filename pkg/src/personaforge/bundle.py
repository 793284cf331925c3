"""Compiling a personalized agent into a self-contained runnable bundle.

A bundle is data, not emitted source: the runtime engine interprets the
adapted agent model plus a directive block (context prompt for generated
responses, optional second-model verification policy, and deterministic
feature settings). Generation is a pure function of its inputs, so identical
inputs produce byte-identical bundle files, and a content digest guards the
file against tampering.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .dsl.interchange import (
    agent_from_json,
    agent_to_json,
    configuration_from_json,
)
from .errors import DigestMismatchError, UnsupportedVersionError, ValidationFailedError
from .model import (
    AgentConfiguration,
    AgentModel,
    TechnologyConfig,
    TextStyle,
    UserProfile,
)
from .personalize import PersonalizationRun, plan_aspects
from .validate import validate_agent

BUNDLE_VERSION = "1"
DIGEST_ALGO = "sha256"

DEFAULT_MAX_RETRIES = 2
DEFAULT_FALLBACK_MESSAGE = "I'm sorry, I cannot provide a suitable answer right now."


@dataclass(frozen=True)
class VerificationPolicy:
    """Second-model check with bounded retries and a safe fallback."""

    check_prompt: str
    max_retries: int = DEFAULT_MAX_RETRIES  # capped at 5
    fallback_message: str = DEFAULT_FALLBACK_MESSAGE


@dataclass(frozen=True)
class DeterministicFeatures:
    """Feature settings applied by fixed rules rather than an LLM."""

    voice_style: str = "default"
    voice_speed: float = 1.0
    text_style: TextStyle = TextStyle()
    avatar: str = ""
    input_modalities: tuple[str, ...] = ("text",)
    output_modalities: tuple[str, ...] = ("text",)
    response_timing: str = "instant"


@dataclass(frozen=True)
class RuntimeDirectives:
    """Everything the runtime needs to personalize generated responses."""

    context_prompt: str = ""
    verification: Optional[VerificationPolicy] = None
    deterministic: DeterministicFeatures = DeterministicFeatures()


@dataclass(frozen=True)
class Provenance:
    base_agent: str
    configuration: str
    user_profile: str


@dataclass(frozen=True)
class AgentBundle:
    """Compiled personalized agent; sufficient to run without source models."""

    bundle_version: str
    profile_label: str
    agent: AgentModel
    directives: RuntimeDirectives
    technology: TechnologyConfig
    provenance: Provenance
    digest: str

    @property
    def bundle_id(self) -> str:
        return self.digest[:12]


# ---------------------------------------------------------------------------
# Directive construction


def build_context_prompt(
    config: AgentConfiguration,
    profile: UserProfile,
    base_language: str = "en",
) -> str:
    """Directive block prepended to every generated-response request.

    One line per active aspect plus content constraints from the profile's
    abilities. Returns empty text when no aspect is active.
    """
    lines: list[str] = []
    for aspect in plan_aspects(config, profile, base_language):
        if aspect.kind == "language":
            lines.append(f"Respond in {aspect.value}.")
        elif aspect.kind == "style":
            lines.append(f"Use a {aspect.value} style.")
        elif aspect.kind == "sentence_length":
            if aspect.value == "concise":
                lines.append("Keep responses concise.")
            else:
                lines.append("Give detailed, elaborate responses.")
        elif aspect.kind == "abbreviations":
            if aspect.value == "expand":
                lines.append("Spell out abbreviations in full.")
            else:
                lines.append("Common abbreviations are acceptable.")
        elif aspect.kind == "language_complexity":
            lines.append(f"Use {aspect.value} language.")
        elif aspect.kind == "content_adaptation":
            excluded: list[str] = []
            for ability in profile.abilities:
                if ability.description:
                    lines.append(f"Respect this user constraint: {ability.description}.")
                for tag in ability.excludes_content:
                    if tag not in excluded:
                        excluded.append(tag)
            if excluded:
                lines.append("Never recommend content tagged: " + ", ".join(excluded) + ".")
    return "\n".join(lines)


def build_check_prompt(context_prompt: str) -> str:
    requirements = context_prompt or "The reply must be suitable for the target user."
    return (
        "You are a strict reviewer for a personalized conversational agent. "
        "A candidate reply must satisfy all of these requirements:\n"
        f"{requirements}\n"
        "Answer with exactly one word: APPROVED if the candidate satisfies every "
        "requirement, otherwise REJECTED."
    )


def features_from_config(config: AgentConfiguration) -> DeterministicFeatures:
    return DeterministicFeatures(
        voice_style=config.presentation.speech_style.voice,
        voice_speed=config.presentation.speech_style.speed,
        text_style=config.presentation.text_style,
        avatar=config.presentation.avatar,
        input_modalities=config.modality.input,
        output_modalities=config.modality.output,
        response_timing=config.behavior.response_timing,
    )


# ---------------------------------------------------------------------------
# Bundle generation


def generate_bundle(
    run: PersonalizationRun,
    config: AgentConfiguration,
    profile: UserProfile,
) -> AgentBundle:
    """Compile a validated personalization result into a bundle."""
    report = validate_agent(run.result)
    if not report.passed:
        problems = "; ".join(str(f) for f in report.findings if f.severity == "error")
        raise ValidationFailedError(
            f"personalized agent {run.result.id!r} fails validation: {problems}"
        )

    context_prompt = build_context_prompt(config, profile, run.result.language)
    verification = None
    if config.content.verify_with_second_llm:
        verification = VerificationPolicy(check_prompt=build_check_prompt(context_prompt))

    directives = RuntimeDirectives(
        context_prompt=context_prompt,
        verification=verification,
        deterministic=features_from_config(config),
    )
    provenance = Provenance(
        base_agent=run.base_agent,
        configuration=config.id,
        user_profile=profile.id,
    )
    digest = _compute_digest(
        run.result, directives, config.technology, profile.label, provenance
    )
    return AgentBundle(
        bundle_version=BUNDLE_VERSION,
        profile_label=profile.label,
        agent=run.result,
        directives=directives,
        technology=config.technology,
        provenance=provenance,
        digest=digest,
    )


# ---------------------------------------------------------------------------
# JSON form and digests


def _directives_to_json(directives: RuntimeDirectives) -> dict[str, Any]:
    verification = None
    if directives.verification is not None:
        verification = {
            "check_prompt": directives.verification.check_prompt,
            "max_retries": directives.verification.max_retries,
            "fallback_message": directives.verification.fallback_message,
        }
    features = directives.deterministic
    return {
        "context_prompt": directives.context_prompt,
        "verification": verification,
        "deterministic": {
            "voice_style": features.voice_style,
            "voice_speed": features.voice_speed,
            "text_style": {
                "font_scale": features.text_style.font_scale,
                "high_contrast": features.text_style.high_contrast,
            },
            "avatar": features.avatar,
            "input_modalities": list(features.input_modalities),
            "output_modalities": list(features.output_modalities),
            "response_timing": features.response_timing,
        },
    }


def _directives_from_json(data: dict[str, Any]) -> RuntimeDirectives:
    verification = None
    if data.get("verification") is not None:
        verification = VerificationPolicy(
            check_prompt=data["verification"]["check_prompt"],
            max_retries=data["verification"]["max_retries"],
            fallback_message=data["verification"]["fallback_message"],
        )
    features = data.get("deterministic", {})
    text_style = features.get("text_style", {})
    return RuntimeDirectives(
        context_prompt=data.get("context_prompt", ""),
        verification=verification,
        deterministic=DeterministicFeatures(
            voice_style=features.get("voice_style", "default"),
            voice_speed=features.get("voice_speed", 1.0),
            text_style=TextStyle(
                font_scale=text_style.get("font_scale", 1.0),
                high_contrast=text_style.get("high_contrast", False),
            ),
            avatar=features.get("avatar", ""),
            input_modalities=tuple(features.get("input_modalities", ["text"])),
            output_modalities=tuple(features.get("output_modalities", ["text"])),
            response_timing=features.get("response_timing", "instant"),
        ),
    )


def _technology_to_json(technology: TechnologyConfig) -> dict[str, Any]:
    return {
        "intent_classifier": technology.intent_classifier,
        "llm_endpoint": technology.llm_endpoint,
        "rag_db": technology.rag_db,
        "platform": technology.platform,
        "text2speech": technology.text2speech,
    }


def _digest_payload(
    agent: AgentModel,
    directives: RuntimeDirectives,
    technology: TechnologyConfig,
    profile_label: str,
    provenance: Provenance,
) -> dict[str, Any]:
    return {
        "bundle_version": BUNDLE_VERSION,
        "profile_label": profile_label,
        "agent": agent_to_json(agent),
        "directives": _directives_to_json(directives),
        "technology": _technology_to_json(technology),
        "provenance": {
            "base_agent": provenance.base_agent,
            "configuration": provenance.configuration,
            "user_profile": provenance.user_profile,
        },
    }


def _compute_digest(
    agent: AgentModel,
    directives: RuntimeDirectives,
    technology: TechnologyConfig,
    profile_label: str,
    provenance: Provenance,
) -> str:
    payload = _digest_payload(agent, directives, technology, profile_label, provenance)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def verify_digest(bundle: AgentBundle) -> bool:
    return bundle.digest == _compute_digest(
        bundle.agent,
        bundle.directives,
        bundle.technology,
        bundle.profile_label,
        bundle.provenance,
    )


def bundle_to_json(bundle: AgentBundle) -> dict[str, Any]:
    document = _digest_payload(
        bundle.agent,
        bundle.directives,
        bundle.technology,
        bundle.profile_label,
        bundle.provenance,
    )
    return {
        "bundle_version": document["bundle_version"],
        "digest": bundle.digest,
        "digest_algo": DIGEST_ALGO,
        "profile_label": document["profile_label"],
        "agent": document["agent"],
        "directives": document["directives"],
        "technology": document["technology"],
        "provenance": document["provenance"],
    }


def bundle_from_json(document: dict[str, Any]) -> AgentBundle:
    version = document.get("bundle_version")
    if version != BUNDLE_VERSION:
        raise UnsupportedVersionError(f"unsupported bundle version: {version!r}")
    algo = document.get("digest_algo", DIGEST_ALGO)
    if algo != DIGEST_ALGO:
        raise UnsupportedVersionError(f"unsupported digest algorithm: {algo!r}")
    technology_data = document.get("technology", {})
    bundle = AgentBundle(
        bundle_version=version,
        profile_label=document.get("profile_label", ""),
        agent=agent_from_json(document["agent"]),
        directives=_directives_from_json(document.get("directives", {})),
        technology=configuration_from_json(
            {"id": "_", "technology": technology_data}
        ).technology,
        provenance=Provenance(
            base_agent=document["provenance"]["base_agent"],
            configuration=document["provenance"]["configuration"],
            user_profile=document["provenance"]["user_profile"],
        ),
        digest=document.get("digest", ""),
    )
    if not verify_digest(bundle):
        raise DigestMismatchError(
            f"bundle digest mismatch for {bundle.profile_label!r}; "
            "the file was modified after generation"
        )
    return bundle


def write_bundle(bundle: AgentBundle, path: str | Path) -> Path:
    """Write the bundle atomically (temp file + rename)."""
    target = Path(path)
    text = json.dumps(bundle_to_json(bundle), indent=2) + "\n"
    fd, temp_name = tempfile.mkstemp(
        dir=target.parent, prefix=target.name, suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(temp_name, target)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return target


def read_bundle(path: str | Path) -> AgentBundle:
    """Load a bundle file, verifying version and digest."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        document = json.loads(text)
    except ValueError as exc:
        raise DigestMismatchError(f"bundle file is not valid JSON: {exc}") from exc
    return bundle_from_json(document)

"""Design-time personalization of predefined agent responses.

Active personalization aspects are applied one at a time, in a fixed
canonical order. Each pass batches every predefined response of the agent
into a single numbered list, sends it through a text-rewriting adapter with
an aspect-specific system prompt, and substitutes the rewritten texts back
positionally. Model structure (states, transitions, intents, action kinds)
is never touched, and any adapter failure leaves the input model unchanged.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Protocol

from .errors import AdapterError, CountMismatchError, MalformedResponseError
from .llm import LlmEndpoint
from .model import (
    AgentConfiguration,
    AgentModel,
    Body,
    UserProfile,
    iter_predefined,
)

CANONICAL_ASPECT_ORDER = (
    "language",
    "style",
    "sentence_length",
    "abbreviations",
    "language_complexity",
    "content_adaptation",
)

NUMBERED_LIST_TAIL = "Return the rewritten texts as a numbered list in the same order."

CONCISE_PROMPT = (
    "You are an editing engine focused on brevity. Rewrite each numbered text "
    "to be concise while preserving the original meaning. Remove redundancy, "
    "trim filler, and keep sentences short. "
    "Return the rewritten texts as a numbered list in the same order."
)


@dataclass(frozen=True)
class DesignTimeAspect:
    """One active personalization pass; value is never 'unchanged'."""

    kind: str
    value: str
    user_context: str = ""  # required for content_adaptation


@dataclass(frozen=True)
class AspectLogEntry:
    aspect: DesignTimeAspect
    prompt: str
    request: str
    response: str


@dataclass(frozen=True)
class PersonalizationRun:
    """Outcome of one design-time pass chain, with a full audit trail."""

    base_agent: str
    configuration: str
    aspect_log: tuple[AspectLogEntry, ...]
    result: AgentModel


class RewriteAdapter(Protocol):
    def complete(self, system_prompt: str, user_payload: str) -> str: ...


# ---------------------------------------------------------------------------
# Aspect planning


def render_user_context(profile: UserProfile) -> str:
    """Deterministic plain-text summary of a profile for prompt embedding."""
    lines = [f"Display name: {profile.label}"]
    if profile.age_group != "unspecified":
        lines.append(f"Age group: {profile.age_group}")
    if profile.native_language:
        lines.append(f"Native language: {profile.native_language}")
    if profile.preferred_languages:
        lines.append("Preferred languages: " + ", ".join(profile.preferred_languages))
    for preference in profile.preferences:
        lines.append(f"Preference {preference.key}: {preference.value}")
    for ability in profile.abilities:
        lines.append(f"Ability constraint {ability.id} ({ability.kind}): {ability.description}")
        if ability.affected_capabilities:
            lines.append("  Affects: " + ", ".join(ability.affected_capabilities))
        if ability.excludes_content:
            lines.append(
                "  Never recommend content tagged: "
                + ", ".join(ability.excludes_content)
            )
    if profile.notes:
        lines.append(f"Notes: {profile.notes}")
    return "\n".join(lines)


def plan_aspects(
    config: AgentConfiguration,
    profile: UserProfile,
    base_language: str = "en",
) -> tuple[DesignTimeAspect, ...]:
    """Derive the active aspects for a configuration, in canonical order.

    The language aspect falls back to the profile's native language when the
    configuration does not pin one; either way it only activates when the
    target differs from the agent's base language.
    """
    aspects: list[DesignTimeAspect] = []

    target_language = config.presentation.language or profile.native_language
    if target_language and target_language != base_language:
        aspects.append(DesignTimeAspect("language", target_language))

    if config.presentation.style != "unchanged":
        aspects.append(DesignTimeAspect("style", config.presentation.style))
    if config.presentation.sentence_length != "unchanged":
        aspects.append(
            DesignTimeAspect("sentence_length", config.presentation.sentence_length)
        )
    if config.presentation.abbreviations != "unchanged":
        aspects.append(
            DesignTimeAspect("abbreviations", config.presentation.abbreviations)
        )
    if config.presentation.language_complexity != "unchanged":
        aspects.append(
            DesignTimeAspect(
                "language_complexity", config.presentation.language_complexity
            )
        )
    if config.content.adapt_to_user_profile:
        aspects.append(
            DesignTimeAspect(
                "content_adaptation", "profile", render_user_context(profile)
            )
        )
    return tuple(aspects)


# ---------------------------------------------------------------------------
# Prompts

# The mock adapter recognizes aspects by these exact phrasings; change them
# together with MockRewriteAdapter._aspect_from_prompt.


def build_aspect_prompt(aspect: DesignTimeAspect) -> str:
    if aspect.kind == "language":
        return (
            "You are a translation engine. Your task is to translate each "
            f"numbered text into {aspect.value} while preserving the original "
            f"meaning and tone. {NUMBERED_LIST_TAIL}"
        )
    if aspect.kind == "style":
        return (
            "You are an editing engine for tone of voice. Rewrite each numbered "
            f"text in a {aspect.value} style while preserving the original "
            f"meaning. {NUMBERED_LIST_TAIL}"
        )
    if aspect.kind == "sentence_length":
        if aspect.value == "concise":
            return CONCISE_PROMPT
        return (
            "You are an editing engine focused on rich detail. Rewrite each "
            "numbered text to be more elaborate, adding clarifying detail while "
            f"preserving the original meaning. {NUMBERED_LIST_TAIL}"
        )
    if aspect.kind == "abbreviations":
        if aspect.value == "expand":
            return (
                "You are an editing engine for clarity. Rewrite each numbered "
                "text with every abbreviation expanded to its full form while "
                f"preserving the original meaning. {NUMBERED_LIST_TAIL}"
            )
        return (
            "You are an editing engine for brevity of form. Rewrite each "
            "numbered text using common abbreviations where they read naturally, "
            f"preserving the original meaning. {NUMBERED_LIST_TAIL}"
        )
    if aspect.kind == "language_complexity":
        return (
            "You are an editing engine for readability. Rewrite each numbered "
            f"text using {aspect.value} language suitable for the target reader "
            f"while preserving the original meaning. {NUMBERED_LIST_TAIL}"
        )
    if aspect.kind == "content_adaptation":
        return (
            "You are a personalization engine. The target user is described by "
            "this profile:\n"
            f"{aspect.user_context}\n"
            "Rewrite each numbered text so that it fits this user, respecting "
            "every stated constraint and never recommending anything the "
            f"profile excludes. {NUMBERED_LIST_TAIL}"
        )
    raise ValueError(f"unknown aspect kind: {aspect.kind!r}")


# ---------------------------------------------------------------------------
# Numbered-list batching


def render_numbered(texts: list[str]) -> str:
    return "\n".join(f"{i}. {text}" for i, text in enumerate(texts, start=1))


_ITEM_RE = re.compile(r"^\s*(\d+)[.)]\s?(.*)$")


def parse_numbered(text: str) -> list[str]:
    """Parse a numbered list; numbering must increase strictly from 1.

    Accepts `N.` and `N)` prefixes; lines without a number continue the
    previous item.
    """
    items: list[str] = []
    expected = 1
    for line in text.splitlines():
        match = _ITEM_RE.match(line)
        if match and int(match.group(1)) == expected:
            items.append(match.group(2))
            expected += 1
        elif match and int(match.group(1)) == expected - 1 and not items:
            raise MalformedResponseError(f"numbering does not start at 1: {line!r}")
        elif items:
            items[-1] = items[-1] + "\n" + line
        elif line.strip():
            raise MalformedResponseError(
                f"response does not start with a numbered item: {line!r}"
            )
    if not items and text.strip():
        raise MalformedResponseError("response contains no numbered items")
    return [item.strip() for item in items]


# ---------------------------------------------------------------------------
# Adapters


class MockRewriteAdapter:
    """Deterministic offline adapter for tests and --mock runs.

    Each rewritten item is the input item with `[<kind>=<value>] ` prepended,
    which makes aspect order and composition directly observable. The aspect
    is recovered from the fixed prompt templates above.
    """

    def __init__(self) -> None:
        self.calls: list[tuple[str, str]] = []

    def complete(self, system_prompt: str, user_payload: str) -> str:
        self.calls.append((system_prompt, user_payload))
        kind, value = self._aspect_from_prompt(system_prompt)
        items = parse_numbered(user_payload) if user_payload.strip() else []
        prefixed = [f"[{kind}={value}] {item}" for item in items]
        return render_numbered(prefixed)

    @property
    def call_count(self) -> int:
        return len(self.calls)

    @staticmethod
    def _aspect_from_prompt(prompt: str) -> tuple[str, str]:
        if "focused on brevity" in prompt:
            return "sentence_length", "concise"
        if "to be more elaborate" in prompt:
            return "sentence_length", "elaborate"
        match = re.search(r"translate each\s+numbered text into (\S+) ", prompt)
        if match:
            return "language", match.group(1)
        match = re.search(r"numbered text in a (formal|informal) style", prompt)
        if match:
            return "style", match.group(1)
        if "every abbreviation expanded" in prompt:
            return "abbreviations", "expand"
        if "using common abbreviations" in prompt:
            return "abbreviations", "allow"
        match = re.search(r"using (simple|standard|expert) language", prompt)
        if match:
            return "language_complexity", match.group(1)
        if prompt.startswith("You are a personalization engine"):
            return "content_adaptation", "profile"
        raise AdapterError("mock adapter cannot identify the aspect prompt")


class LiveRewriteAdapter:
    """Adapter backed by a real chat-completion endpoint (PF_LLM_* env)."""

    def __init__(self, endpoint: LlmEndpoint | None = None):
        self.endpoint = endpoint or LlmEndpoint()

    def complete(self, system_prompt: str, user_payload: str) -> str:
        return self.endpoint.chat(system_prompt, user_payload)


# ---------------------------------------------------------------------------
# The sequential pass chain


def _substitute_texts(model: AgentModel, texts: list[str]) -> AgentModel:
    positions = [(state_id, index) for state_id, index, _ in iter_predefined(model)]
    assert len(positions) == len(texts)
    replacement = dict(zip(positions, texts))
    states = []
    for state in model.states:
        actions = []
        for index, action in enumerate(state.body.actions):
            key = (state.id, index)
            if key in replacement:
                actions.append(replace(action, text=replacement[key]))
            else:
                actions.append(action)
        states.append(replace(state, body=Body(tuple(actions))))
    return replace(model, states=tuple(states))


def apply_design_time(
    agent: AgentModel,
    aspects: tuple[DesignTimeAspect, ...],
    adapter: RewriteAdapter,
    configuration_id: str = "",
) -> PersonalizationRun:
    """Apply aspects sequentially; each pass feeds the next one's input.

    One adapter call is made per aspect, covering all predefined texts as a
    numbered list. A count mismatch or unparseable response aborts the whole
    run; the input model is never mutated.
    """
    current = agent
    log: list[AspectLogEntry] = []
    for aspect in aspects:
        texts = [action.text for _, _, action in iter_predefined(current)]
        prompt = build_aspect_prompt(aspect)
        request = render_numbered(texts)
        response = adapter.complete(prompt, request)
        rewritten = parse_numbered(response)
        if len(rewritten) != len(texts):
            raise CountMismatchError(expected=len(texts), got=len(rewritten))
        current = _substitute_texts(current, rewritten)
        log.append(AspectLogEntry(aspect, prompt, request, response))
    return PersonalizationRun(
        base_agent=agent.id,
        configuration=configuration_id,
        aspect_log=tuple(log),
        result=current,
    )


def run_to_json(run: PersonalizationRun) -> dict:
    """Audit-friendly JSON view of a personalization run (no timestamps)."""
    return {
        "base_agent": run.base_agent,
        "configuration": run.configuration,
        "aspects": [
            {
                "kind": entry.aspect.kind,
                "value": entry.aspect.value,
                "user_context": entry.aspect.user_context,
                "prompt": entry.prompt,
                "request": entry.request,
                "response": entry.response,
            }
            for entry in run.aspect_log
        ],
    }

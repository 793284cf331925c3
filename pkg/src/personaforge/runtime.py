"""Interpreting an agent bundle as a live chat session.

A session walks the agent's state machine: user messages are classified
into intents, the matching transition fires, the target state's body runs
(predefined texts are emitted as-is, generated responses go through the
adapter with the bundle's context prompt and optional verification loop),
and automatic transitions are chased until the session again awaits input.

Every observable step becomes a SessionEvent with a per-session strictly
increasing sequence number, so clients can resume a stream idempotently.
"""

from __future__ import annotations

import re
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional, Protocol

from .bundle import AgentBundle, verify_digest
from .errors import (
    AdapterConfigError,
    AdapterError,
    InvalidBundleError,
    NoFallbackIntentError,
    NoTransitionError,
)
from .model import State, lookup_state

HISTORY_EXCERPT_TURNS = 6

TYPING_BASE_MS = 200
TYPING_PER_CHAR_MS = 30
TYPING_CAP_MS = 3000

EVENT_KINDS = ("session_started", "typing_started", "message", "modality_hint", "error")


@dataclass(frozen=True)
class SessionEvent:
    kind: str
    payload: dict
    sequence: int
    ts: float


@dataclass
class ChatSession:
    """Live conversation state; events are append-only."""

    id: str
    bundle: AgentBundle
    current_state: str
    history: list[tuple[str, str, float]] = field(default_factory=list)
    events: list[SessionEvent] = field(default_factory=list)
    _sequence: int = 0

    def emit(self, kind: str, payload: dict) -> SessionEvent:
        self._sequence += 1
        event = SessionEvent(kind, payload, self._sequence, time.time())
        self.events.append(event)
        return event


class GenerationAdapter(Protocol):
    def generate(
        self,
        context_prompt: str,
        instruction: str,
        user_message: str,
        history_excerpt: tuple[tuple[str, str], ...],
    ) -> str: ...

    def verify(self, check_prompt: str, candidate: str) -> str: ...


class MockGenerationAdapter:
    """Deterministic offline generation adapter.

    An optional script supplies the first responses verbatim (useful for
    driving the verification loop); afterwards generate echoes the user
    message. verify rejects any candidate containing a forbidden tag.
    """

    def __init__(
        self,
        script: list[str] | None = None,
        forbidden_tags: tuple[str, ...] = (),
    ):
        self.script = list(script or [])
        self.forbidden_tags = forbidden_tags
        self.generate_calls = 0
        self.verify_calls = 0

    def generate(self, context_prompt, instruction, user_message, history_excerpt):
        self.generate_calls += 1
        if self.script:
            return self.script.pop(0)
        return f"[generated] {user_message}"

    def verify(self, check_prompt: str, candidate: str) -> str:
        self.verify_calls += 1
        for tag in self.forbidden_tags:
            if tag in candidate:
                return "rejected"
        return "approved"


class LiveGenerationAdapter:
    """Generation adapter backed by a chat-completion endpoint (PF_LLM_* env)."""

    def __init__(self, endpoint=None):
        from .llm import LlmEndpoint

        self.endpoint = endpoint or LlmEndpoint()

    def generate(self, context_prompt, instruction, user_message, history_excerpt):
        system = context_prompt or "You are a helpful conversational agent."
        history = "\n".join(f"{speaker}: {text}" for speaker, text in history_excerpt)
        parts = []
        if instruction:
            parts.append(f"Task: {instruction}")
        if history:
            parts.append(f"Conversation so far:\n{history}")
        parts.append(f"User message: {user_message}")
        return self.endpoint.chat(system, "\n\n".join(parts))

    def verify(self, check_prompt: str, candidate: str) -> str:
        answer = self.endpoint.chat(check_prompt, candidate).strip().upper()
        return "approved" if answer.startswith("APPROVED") else "rejected"


# ---------------------------------------------------------------------------
# Intent classification


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


def classify_intent(
    bundle: AgentBundle,
    utterance: str,
    adapter: Optional[GenerationAdapter] = None,
) -> str:
    """Map an utterance to an intent id.

    The keyword classifier counts training-phrase tokens contained in the
    utterance; the highest hit count wins and declaration order breaks ties.
    No hit falls back to the fallback intent. The llm classifier delegates to
    the generation adapter with a fixed classification prompt.
    """
    model = bundle.agent
    if bundle.technology.intent_classifier == "llm":
        if adapter is None:
            raise AdapterConfigError("llm intent classifier requires an adapter")
        candidates = [i.id for i in model.intents if not i.is_fallback]
        instruction = (
            "Classify the user message into exactly one of these intent ids: "
            + ", ".join(candidates)
            + ". Reply with the intent id alone, or NONE if none applies."
        )
        answer = adapter.generate("", instruction, utterance, ())
        for intent_id in candidates:
            if re.search(rf"\b{re.escape(intent_id)}\b", answer):
                return intent_id
        fallback = model.fallback_intent()
        if fallback is None:
            raise NoFallbackIntentError(
                f"no intent matched {utterance!r} and no fallback is declared"
            )
        return fallback.id

    utterance_tokens = _tokens(utterance)
    best_id: Optional[str] = None
    best_score = 0
    for intent in model.intents:
        if intent.is_fallback:
            continue
        phrase_tokens: set[str] = set()
        for phrase in intent.training_phrases:
            phrase_tokens |= _tokens(phrase)
        score = len(phrase_tokens & utterance_tokens)
        if score > best_score:
            best_id = intent.id
            best_score = score
    if best_id is not None:
        return best_id
    fallback = model.fallback_intent()
    if fallback is None:
        raise NoFallbackIntentError(
            f"no intent matched {utterance!r} and no fallback is declared"
        )
    return fallback.id


# ---------------------------------------------------------------------------
# Deterministic output features


def compute_typing_delay(text: str, features) -> int:
    """Milliseconds of simulated typing before a message is shown."""
    if features.response_timing != "simulated_typing":
        return 0
    return min(TYPING_BASE_MS + TYPING_PER_CHAR_MS * len(text), TYPING_CAP_MS)


def render_output(text: str, features) -> list[tuple[str, dict]]:
    """Payload parts for one agent output, message first.

    Speech output adds a modality hint carrying the speech parameters; the
    client synthesizes audio for the preceding message itself.
    """
    parts: list[tuple[str, dict]] = []
    if "text" in features.output_modalities or "speech" in features.output_modalities:
        parts.append(("message", {"speaker": "agent", "text": text}))
    if "speech" in features.output_modalities:
        parts.append(
            (
                "modality_hint",
                {
                    "channel": "speech",
                    "voice_style": features.voice_style,
                    "voice_speed": features.voice_speed,
                },
            )
        )
    return parts


# ---------------------------------------------------------------------------
# Session lifecycle


def create_session(
    bundle: AgentBundle,
    adapter: Optional[GenerationAdapter] = None,
    session_id: Optional[str] = None,
) -> ChatSession:
    """Start a session at the initial state and chase automatic transitions."""
    if not verify_digest(bundle):
        raise InvalidBundleError("bundle digest does not match its content")
    if lookup_state(bundle.agent, bundle.agent.initial_state) is None:
        raise InvalidBundleError(
            f"bundle initial state {bundle.agent.initial_state!r} does not resolve"
        )
    session = ChatSession(
        id=session_id or uuid.uuid4().hex,
        bundle=bundle,
        current_state=bundle.agent.initial_state,
    )
    session.emit(
        "session_started",
        {
            "profile_label": bundle.profile_label,
            "agent": bundle.agent.name,
            "input_modalities": list(bundle.directives.deterministic.input_modalities),
        },
    )
    staged: list[SessionEvent] = []
    _run_state_and_chase(session, bundle.agent.initial_state, "", adapter, staged)
    return session


def emit_error(session: ChatSession, message: str) -> SessionEvent:
    return session.emit("error", {"message": message})


def step(
    session: ChatSession,
    user_message: str,
    adapter: GenerationAdapter,
) -> list[SessionEvent]:
    """Process one user message and return the newly emitted events.

    An adapter failure is reported as an error event and leaves the session
    state (and event sequence of the staged output) unchanged.
    """
    bundle = session.bundle
    session.history.append(("user", user_message, time.time()))
    state_before = session.current_state
    sequence_before = session._sequence
    events_len_before = len(session.events)
    history_len_before = len(session.history)
    try:
        intent_id = classify_intent(bundle, user_message, adapter)
        transition = _match_transition(session, intent_id)
        staged: list[SessionEvent] = []
        _run_state_and_chase(session, transition.target, user_message, adapter, staged)
        return staged
    except AdapterError as exc:
        # roll back everything but the user turn, then surface the failure
        session.current_state = state_before
        del session.events[events_len_before:]
        session._sequence = sequence_before
        del session.history[history_len_before:]
        event = emit_error(session, f"adapter failure: {exc}")
        return [event]


def _match_transition(session: ChatSession, intent_id: str):
    state = lookup_state(session.bundle.agent, session.current_state)
    assert state is not None
    for transition in state.transitions:
        if transition.condition is not None and transition.condition.intent == intent_id:
            return transition
    raise NoTransitionError(
        f"intent {intent_id!r} has no transition from state {session.current_state!r}"
    )


def _run_state_and_chase(
    session: ChatSession,
    state_id: str,
    user_message: str,
    adapter: Optional[GenerationAdapter],
    staged: list[SessionEvent],
) -> None:
    """Enter a state, execute its body, then follow automatic transitions."""
    model = session.bundle.agent
    visited: set[str] = set()
    current = state_id
    while True:
        if current in visited:
            raise InvalidBundleError(
                f"automatic transitions cycle through state {current!r}"
            )
        visited.add(current)
        state = lookup_state(model, current)
        if state is None:
            raise InvalidBundleError(f"transition target {current!r} does not resolve")
        session.current_state = current
        _execute_body(session, state, user_message, adapter, staged)
        auto = state.automatic_transition
        if auto is None:
            return
        current = auto.target


def _execute_body(
    session: ChatSession,
    state: State,
    user_message: str,
    adapter: Optional[GenerationAdapter],
    staged: list[SessionEvent],
) -> None:
    for action in state.body.actions:
        if action.kind == "predefined_response":
            _emit_output(session, action.text, None, staged)
        else:
            if adapter is None:
                raise AdapterError(
                    f"state {state.id!r} needs a generation adapter but none is set"
                )
            text, retries, fell_back = _generate_verified(
                session, action, user_message, adapter
            )
            extra = {"retry_count": retries}
            if fell_back:
                extra["fallback"] = True
            _emit_output(session, text, extra, staged)


def _generate_verified(session, action, user_message, adapter):
    """Run the generate/verify loop; bounded by the verification policy."""
    bundle = session.bundle
    directives = bundle.directives
    instruction = action.instruction
    if action.kind == "rag_response" and bundle.technology.rag_db:
        source_note = f"Use the knowledge source '{bundle.technology.rag_db}'."
        instruction = f"{source_note} {instruction}".strip()
    excerpt = tuple(
        (speaker, text)
        for speaker, text, _ in session.history[-HISTORY_EXCERPT_TURNS:]
    )
    policy = directives.verification
    # retries are hard-capped so a malformed policy cannot loop unboundedly
    attempts = 1 + (min(policy.max_retries, 5) if policy is not None else 0)
    attempt_instruction = instruction
    for attempt in range(attempts):
        candidate = adapter.generate(
            directives.context_prompt, attempt_instruction, user_message, excerpt
        )
        if policy is None:
            return candidate, 0, False
        if adapter.verify(policy.check_prompt, candidate) == "approved":
            return candidate, attempt, False
        attempt_instruction = (
            f"{instruction} The previous candidate was rejected by the "
            "personalization reviewer because it violated the required "
            "personalization constraints. Rewrite it to comply."
        ).strip()
    return policy.fallback_message, policy.max_retries, True


def _emit_output(
    session: ChatSession,
    text: str,
    extra: Optional[dict],
    staged: list[SessionEvent],
) -> None:
    features = session.bundle.directives.deterministic
    delay = compute_typing_delay(text, features)
    if features.response_timing == "simulated_typing":
        staged.append(session.emit("typing_started", {"duration_ms": delay}))
    for kind, payload in render_output(text, features):
        if kind == "message":
            if extra:
                payload = {**payload, **extra}
            session.history.append(("agent", text, time.time()))
        elif kind == "modality_hint":
            payload = {**payload, "text2speech": session.bundle.technology.text2speech}
        staged.append(session.emit(kind, payload))

"""In-memory domain types for user profiles, agents, configurations and mappings.

All model values are frozen dataclasses built on tuples, so they are immutable
after construction and safe to share across threads. Invariants are documented
here but checked by the parsers and the validator, not by the constructors;
that keeps deliberately broken values constructible for checking and testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import DanglingReferenceError, DuplicateMappingError, UnknownStateError

AGE_GROUPS = ("child", "adult", "elderly", "unspecified")
ABILITY_KINDS = ("physical", "sensory", "cognitive", "other")
ACTION_KINDS = ("predefined_response", "llm_response", "rag_response")
STYLES = ("formal", "informal", "unchanged")
SENTENCE_LENGTHS = ("concise", "elaborate", "unchanged")
ABBREVIATIONS = ("expand", "allow", "unchanged")
COMPLEXITIES = ("simple", "standard", "expert", "unchanged")
RESPONSE_TIMINGS = ("instant", "simulated_typing")
MODALITIES = ("text", "speech")
INTENT_CLASSIFIERS = ("keyword", "llm")
PLATFORMS = ("http_chat", "console")


# ---------------------------------------------------------------------------
# User profiles


@dataclass(frozen=True)
class PreferenceTag:
    """Free-form key/value preference, e.g. interaction=oral."""

    key: str
    value: str


@dataclass(frozen=True)
class AbilityConstraint:
    """A physical, sensory or cognitive constraint of the target user.

    affected_capabilities must be non-empty unless kind is "other";
    excludes_content lists tags the agent must never recommend.
    """

    id: str
    kind: str
    description: str = ""
    affected_capabilities: tuple[str, ...] = ()
    excludes_content: tuple[str, ...] = ()


@dataclass(frozen=True)
class UserProfile:
    """Attributes of a target end-user category (e.g. elderly, paraplegic)."""

    id: str
    display_name: str = ""
    age_group: str = "unspecified"
    native_language: str = ""
    preferred_languages: tuple[str, ...] = ()
    abilities: tuple[AbilityConstraint, ...] = ()
    preferences: tuple[PreferenceTag, ...] = ()
    notes: str = ""

    @property
    def label(self) -> str:
        return self.display_name or self.id


# ---------------------------------------------------------------------------
# Agent models


@dataclass(frozen=True)
class Intent:
    """A class of user utterances; non-fallback intents need >=1 phrase."""

    id: str
    training_phrases: tuple[str, ...] = ()
    is_fallback: bool = False


@dataclass(frozen=True)
class Condition:
    """Transition guard; only intent matching is supported."""

    intent: str
    kind: str = "intent_matched"


@dataclass(frozen=True)
class Transition:
    """Edge between states; condition None means automatic."""

    source: str
    target: str
    condition: Optional[Condition] = None

    @property
    def is_automatic(self) -> bool:
        return self.condition is None


@dataclass(frozen=True)
class Action:
    """One step in a state body.

    text is required for predefined_response; instruction is an optional
    task hint for llm_response / rag_response.
    """

    kind: str
    text: str = ""
    instruction: str = ""


@dataclass(frozen=True)
class Body:
    actions: tuple[Action, ...] = ()


@dataclass(frozen=True)
class State:
    """A conversational state with its body and outgoing transitions.

    A state with an automatic transition must have no other transitions.
    """

    id: str
    body: Body = Body()
    transitions: tuple[Transition, ...] = ()

    @property
    def automatic_transition(self) -> Optional[Transition]:
        for transition in self.transitions:
            if transition.is_automatic:
                return transition
        return None


@dataclass(frozen=True)
class AgentModel:
    """State machine describing the base conversational agent."""

    id: str
    name: str
    states: tuple[State, ...] = ()
    intents: tuple[Intent, ...] = ()
    initial_state: str = ""
    language: str = "en"

    def state_ids(self) -> tuple[str, ...]:
        return tuple(state.id for state in self.states)

    def intent_ids(self) -> tuple[str, ...]:
        return tuple(intent.id for intent in self.intents)

    def fallback_intent(self) -> Optional[Intent]:
        for intent in self.intents:
            if intent.is_fallback:
                return intent
        return None


# ---------------------------------------------------------------------------
# Agent configurations


@dataclass(frozen=True)
class TextStyle:
    font_scale: float = 1.0  # >= 1.0
    high_contrast: bool = False


@dataclass(frozen=True)
class SpeechStyle:
    voice: str = "default"
    speed: float = 1.0  # within [0.5, 2.0]


@dataclass(frozen=True)
class PresentationConfig:
    """How content is delivered: wording style plus text/speech rendering."""

    language: str = ""
    style: str = "unchanged"
    sentence_length: str = "unchanged"
    abbreviations: str = "unchanged"
    language_complexity: str = "unchanged"
    text_style: TextStyle = TextStyle()
    speech_style: SpeechStyle = SpeechStyle()
    avatar: str = ""


@dataclass(frozen=True)
class BehaviorConfig:
    response_timing: str = "instant"


@dataclass(frozen=True)
class ModalityConfig:
    """Input/output channels; each side must stay non-empty."""

    input: tuple[str, ...] = ("text",)
    output: tuple[str, ...] = ("text",)


@dataclass(frozen=True)
class ContentConfig:
    """verify_with_second_llm requires adapt_to_user_profile."""

    adapt_to_user_profile: bool = False
    verify_with_second_llm: bool = False


@dataclass(frozen=True)
class TechnologyConfig:
    """Technology stack settings; speech output requires a text2speech adapter."""

    intent_classifier: str = "keyword"
    llm_endpoint: str = "default"
    rag_db: str = ""
    platform: str = "http_chat"
    text2speech: str = ""


@dataclass(frozen=True)
class AgentConfiguration:
    """Personalization and technology settings applied to a base agent."""

    id: str
    presentation: PresentationConfig = PresentationConfig()
    behavior: BehaviorConfig = BehaviorConfig()
    modality: ModalityConfig = ModalityConfig()
    content: ContentConfig = ContentConfig()
    technology: TechnologyConfig = TechnologyConfig()


@dataclass(frozen=True)
class PersonalizationMapping:
    """Links one user profile to one agent under a configuration."""

    user_profile: str
    agent: str
    configuration: str

    @property
    def pair(self) -> tuple[str, str]:
        return (self.user_profile, self.agent)


# ---------------------------------------------------------------------------
# Workspace


@dataclass
class ModelWorkspace:
    """Mutable container for all models loaded from one workspace directory.

    The contained model values stay immutable; only the collections grow.
    add_mapping enforces (profile, agent) uniqueness; loaders that need to
    surface duplicates as findings append to `mappings` directly.
    """

    profiles: dict[str, UserProfile] = field(default_factory=dict)
    agents: dict[str, AgentModel] = field(default_factory=dict)
    configurations: dict[str, AgentConfiguration] = field(default_factory=dict)
    mappings: list[PersonalizationMapping] = field(default_factory=list)

    def add_profile(self, profile: UserProfile) -> None:
        if profile.id in self.profiles:
            raise ValueError(f"duplicate profile id: {profile.id!r}")
        self.profiles[profile.id] = profile

    def add_agent(self, agent: AgentModel) -> None:
        if agent.id in self.agents:
            raise ValueError(f"duplicate agent id: {agent.id!r}")
        self.agents[agent.id] = agent

    def add_configuration(self, configuration: AgentConfiguration) -> None:
        if configuration.id in self.configurations:
            raise ValueError(f"duplicate configuration id: {configuration.id!r}")
        self.configurations[configuration.id] = configuration

    def add_mapping(self, mapping: PersonalizationMapping) -> None:
        for existing in self.mappings:
            if existing.pair == mapping.pair:
                raise DuplicateMappingError(
                    f"mapping for {mapping.pair} already exists"
                )
        self.mappings.append(mapping)


def lookup_state(model: AgentModel, state_id: str) -> Optional[State]:
    """Return the state with the given id, or None if absent."""
    for state in model.states:
        if state.id == state_id:
            return state
    return None


def outgoing_transitions(model: AgentModel, state_id: str) -> tuple[Transition, ...]:
    """Return the transitions leaving a state, in declaration order."""
    state = lookup_state(model, state_id)
    if state is None:
        raise UnknownStateError(f"unknown state: {state_id!r}")
    return state.transitions


def resolve_mapping(
    workspace: ModelWorkspace, mapping: PersonalizationMapping
) -> tuple[UserProfile, AgentModel, AgentConfiguration]:
    """Resolve a mapping to its (profile, agent, configuration) triple."""
    profile = workspace.profiles.get(mapping.user_profile)
    if profile is None:
        raise DanglingReferenceError("user profile", mapping.user_profile)
    agent = workspace.agents.get(mapping.agent)
    if agent is None:
        raise DanglingReferenceError("agent", mapping.agent)
    configuration = workspace.configurations.get(mapping.configuration)
    if configuration is None:
        raise DanglingReferenceError("configuration", mapping.configuration)
    return profile, agent, configuration


def iter_predefined(model: AgentModel) -> Iterator[tuple[str, int, Action]]:
    """Yield (state id, action index, action) for every predefined response.

    Order is deterministic: states in declaration order, actions in body order.
    """
    for state in model.states:
        for index, action in enumerate(state.body.actions):
            if action.kind == "predefined_response":
                yield state.id, index, action

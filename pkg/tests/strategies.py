"""Hypothesis strategies producing models the textual syntax can express."""

from __future__ import annotations

from hypothesis import strategies as st

from personaforge.model import (
    ABBREVIATIONS,
    ABILITY_KINDS,
    AGE_GROUPS,
    COMPLEXITIES,
    INTENT_CLASSIFIERS,
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

identifiers = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True)
language_tags = st.from_regex(r"[A-Za-z]{2,5}(-[A-Za-z0-9]{2,4})?", fullmatch=True)
texts = st.text(max_size=30)
modality_sets = st.sampled_from([("text",), ("speech",), ("text", "speech")])


@st.composite
def agent_models(draw) -> AgentModel:
    state_ids = draw(st.lists(identifiers, min_size=1, max_size=4, unique=True))
    intent_ids = draw(st.lists(identifiers, min_size=0, max_size=3, unique=True))

    intents = []
    for index, intent_id in enumerate(intent_ids):
        fallback = index == 0 and draw(st.booleans())
        phrases = () if fallback else tuple(
            draw(st.lists(texts, min_size=1, max_size=3))
        )
        intents.append(Intent(intent_id, phrases, fallback))

    states = []
    for state_id in state_ids:
        actions = []
        for _ in range(draw(st.integers(0, 2))):
            kind = draw(st.sampled_from(("predefined_response", "llm_response", "rag_response")))
            if kind == "predefined_response":
                actions.append(Action(kind, text=draw(texts)))
            else:
                actions.append(Action(kind, instruction=draw(texts)))
        if draw(st.booleans()):
            transitions = (
                Transition(state_id, draw(st.sampled_from(state_ids)), None),
            )
        elif intent_ids:
            transitions = tuple(
                Transition(
                    state_id,
                    draw(st.sampled_from(state_ids)),
                    Condition(draw(st.sampled_from(intent_ids))),
                )
                for _ in range(draw(st.integers(0, 2)))
            )
        else:
            transitions = ()
        states.append(State(state_id, Body(tuple(actions)), transitions))

    agent_id = draw(identifiers)
    return AgentModel(
        id=agent_id,
        name=draw(st.one_of(st.just(agent_id), texts)),
        states=tuple(states),
        intents=tuple(intents),
        initial_state=draw(st.sampled_from(state_ids)),
        language=draw(language_tags),
    )


@st.composite
def user_profiles(draw) -> UserProfile:
    ability_ids = draw(st.lists(identifiers, max_size=2, unique=True))
    abilities = []
    for ability_id in ability_ids:
        kind = draw(st.sampled_from(ABILITY_KINDS))
        affects = tuple(draw(st.lists(texts, min_size=0 if kind == "other" else 1, max_size=2)))
        abilities.append(
            AbilityConstraint(
                id=ability_id,
                kind=kind,
                description=draw(texts),
                affected_capabilities=affects,
                excludes_content=tuple(draw(st.lists(texts, max_size=2))),
            )
        )
    return UserProfile(
        id=draw(identifiers),
        display_name=draw(texts),
        age_group=draw(st.sampled_from(AGE_GROUPS)),
        native_language=draw(st.one_of(st.just(""), language_tags)),
        preferred_languages=tuple(draw(st.lists(language_tags, max_size=2))),
        abilities=tuple(abilities),
        preferences=tuple(
            PreferenceTag(draw(identifiers), draw(texts))
            for _ in range(draw(st.integers(0, 2)))
        ),
        notes=draw(texts),
    )


@st.composite
def agent_configurations(draw) -> AgentConfiguration:
    output = draw(modality_sets)
    adapt = draw(st.booleans())
    return AgentConfiguration(
        id=draw(identifiers),
        presentation=PresentationConfig(
            language=draw(st.one_of(st.just(""), language_tags)),
            style=draw(st.sampled_from(STYLES)),
            sentence_length=draw(st.sampled_from(SENTENCE_LENGTHS)),
            abbreviations=draw(st.sampled_from(ABBREVIATIONS)),
            language_complexity=draw(st.sampled_from(COMPLEXITIES)),
            text_style=TextStyle(
                font_scale=draw(st.floats(1.0, 4.0, allow_nan=False)),
                high_contrast=draw(st.booleans()),
            ),
            speech_style=SpeechStyle(
                voice=draw(texts),
                speed=draw(st.floats(0.5, 2.0, allow_nan=False)),
            ),
            avatar=draw(texts),
        ),
        behavior=BehaviorConfig(response_timing=draw(st.sampled_from(RESPONSE_TIMINGS))),
        modality=ModalityConfig(input=draw(modality_sets), output=output),
        content=ContentConfig(
            adapt_to_user_profile=adapt,
            verify_with_second_llm=adapt and draw(st.booleans()),
        ),
        technology=TechnologyConfig(
            intent_classifier=draw(st.sampled_from(INTENT_CLASSIFIERS)),
            llm_endpoint=draw(texts),
            rag_db=draw(texts),
            platform=draw(st.sampled_from(PLATFORMS)),
            text2speech=(
                draw(st.text(min_size=1, max_size=20))
                if "speech" in output
                else draw(texts)
            ),
        ),
    )


@st.composite
def mapping_files(draw) -> tuple[PersonalizationMapping, ...]:
    pairs = draw(
        st.lists(st.tuples(identifiers, identifiers), max_size=4, unique=True)
    )
    return tuple(
        PersonalizationMapping(profile, agent, draw(identifiers))
        for profile, agent in pairs
    )

import random
from collections import deque
from dataclasses import replace

import pytest
from hypothesis import given, settings

from personaforge.errors import ShapeMismatchError
from personaforge.model import (
    Action,
    AgentConfiguration,
    AgentModel,
    Body,
    Condition,
    Intent,
    ModalityConfig,
    ModelWorkspace,
    PersonalizationMapping,
    State,
    TechnologyConfig,
    Transition,
    UserProfile,
)
from personaforge.personalize import MockRewriteAdapter, apply_design_time, plan_aspects
from personaforge.validate import diff_models, validate_agent, validate_workspace

from conftest import replace_state
from strategies import agent_models


def test_gym_agent_passes(gym_agent):
    report = validate_agent(gym_agent)
    assert report.passed
    assert not report.by_code("E004")


def test_dangling_transition_target(gym_agent):
    training = next(s for s in gym_agent.states if s.id == "TrainingPlan")
    broken = replace_state(
        gym_agent,
        replace(training, transitions=(Transition("TrainingPlan", "Idl", None),)),
    )
    report = validate_agent(broken)
    assert not report.passed
    findings = report.by_code("E002")
    assert len(findings) == 1
    assert findings[0].subject == "TrainingPlan"
    assert "Idl" in findings[0].message


def test_unreachable_state_and_unused_intent(gym_agent):
    idle = next(s for s in gym_agent.states if s.id == "Idle")
    kept = tuple(
        t for t in idle.transitions if t.condition and t.condition.intent != "Other"
    )
    broken = replace_state(gym_agent, replace(idle, transitions=kept))
    report = validate_agent(broken)
    assert [f.subject for f in report.by_code("E004")] == ["OtherQuestions"]
    assert [f.subject for f in report.by_code("W001")] == ["Other"]


def test_missing_initial_state():
    model = AgentModel(
        id="a",
        name="a",
        states=(State("S"),),
        initial_state="Nope",
    )
    report = validate_agent(model)
    assert report.by_code("E001")


def test_dangling_intent_reference():
    model = AgentModel(
        id="a",
        name="a",
        states=(
            State("S", transitions=(Transition("S", "S", Condition("ghost")),)),
        ),
        initial_state="S",
    )
    assert validate_agent(model).by_code("E003")


def test_auto_mixed_with_other_transitions():
    model = AgentModel(
        id="a",
        name="a",
        intents=(Intent("i", ("x",)),),
        states=(
            State(
                "S",
                transitions=(
                    Transition("S", "T", None),
                    Transition("S", "T", Condition("i")),
                ),
            ),
            State("T", transitions=(Transition("T", "S", None),)),
        ),
        initial_state="S",
    )
    assert validate_agent(model).by_code("E005")


def test_empty_predefined_text():
    model = AgentModel(
        id="a",
        name="a",
        states=(State("S", Body((Action("predefined_response", text=""),))),),
        initial_state="S",
    )
    assert validate_agent(model).by_code("E006")


def test_automatic_cycle_detected():
    model = AgentModel(
        id="a",
        name="a",
        states=(
            State("A", transitions=(Transition("A", "B", None),)),
            State("B", transitions=(Transition("B", "A", None),)),
        ),
        initial_state="A",
    )
    findings = validate_agent(model).by_code("E007")
    assert len(findings) == 1
    assert "A" in findings[0].message and "B" in findings[0].message


def test_validator_is_deterministic(gym_agent):
    assert validate_agent(gym_agent) == validate_agent(gym_agent)


# ---------------------------------------------------------------------------
# Reachability against an independent breadth-first oracle


def bfs_unreachable(model: AgentModel) -> set[str]:
    """Independent reachability oracle: queue-based breadth-first search."""
    edges = {s.id: [t.target for t in s.transitions] for s in model.states}
    ids = set(edges)
    seen = {model.initial_state}
    queue = deque([model.initial_state])
    while queue:
        node = queue.popleft()
        for target in edges.get(node, []):
            if target in ids and target not in seen:
                seen.add(target)
                queue.append(target)
    return ids - seen


def random_agent(rng: random.Random, max_states: int = 50) -> AgentModel:
    n = rng.randint(1, max_states)
    ids = [f"s{i}" for i in range(n)]
    intents = (Intent("go", ("go",)),)
    states = []
    for state_id in ids:
        n_edges = rng.choice((0, 1, 1, 2, 3))
        transitions = []
        if n_edges and rng.random() < 0.4:
            transitions.append(Transition(state_id, rng.choice(ids), None))
        else:
            for _ in range(n_edges):
                transitions.append(
                    Transition(state_id, rng.choice(ids), Condition("go"))
                )
        states.append(State(state_id, transitions=tuple(transitions)))
    return AgentModel(
        id="r",
        name="r",
        states=tuple(states),
        intents=intents,
        initial_state=rng.choice(ids),
    )


def test_reachability_matches_bfs_oracle():
    rng = random.Random(94017)
    for _ in range(100):
        model = random_agent(rng)
        reported = {f.subject for f in validate_agent(model).by_code("E004")}
        assert reported == bfs_unreachable(model)


# ---------------------------------------------------------------------------
# Workspace-level checks


def test_running_example_workspace_passes(gym_workspace):
    report = validate_workspace(gym_workspace)
    assert report.passed


def test_duplicate_mapping_reported(gym_workspace):
    workspace = ModelWorkspace(
        profiles=dict(gym_workspace.profiles),
        agents=dict(gym_workspace.agents),
        configurations=dict(gym_workspace.configurations),
        mappings=list(gym_workspace.mappings)
        + [PersonalizationMapping("elderly", "gym", "paraplegic_conf")],
    )
    report = validate_workspace(workspace)
    findings = report.by_code("E102")
    assert len(findings) == 1
    assert findings[0].subject == "elderly->gym"


def test_dangling_mapping_reference(gym_workspace):
    workspace = ModelWorkspace(
        profiles=dict(gym_workspace.profiles),
        agents=dict(gym_workspace.agents),
        configurations=dict(gym_workspace.configurations),
        mappings=[PersonalizationMapping("elderly", "gym", "missing_conf")],
    )
    findings = validate_workspace(workspace).by_code("E101")
    assert len(findings) == 1
    assert "missing_conf" in findings[0].message


def test_adaptation_with_empty_profile_warns(gym_workspace):
    empty = UserProfile(id="empty")
    workspace = ModelWorkspace(
        profiles={"empty": empty},
        agents=dict(gym_workspace.agents),
        configurations=dict(gym_workspace.configurations),
        mappings=[PersonalizationMapping("empty", "gym", "paraplegic_conf")],
    )
    report = validate_workspace(workspace)
    assert report.by_code("W101")
    assert report.passed  # warnings do not fail the gate


def test_speech_without_tts_reported():
    config = AgentConfiguration(
        id="c",
        modality=ModalityConfig(input=("text",), output=("text", "speech")),
        technology=TechnologyConfig(text2speech=""),
    )
    workspace = ModelWorkspace(configurations={"c": config})
    assert validate_workspace(workspace).by_code("E103")


# ---------------------------------------------------------------------------
# Diffing


def test_diff_after_mock_personalization(gym_agent, elderly_triple):
    profile, agent, config = elderly_triple
    run = apply_design_time(
        agent, plan_aspects(config, profile, agent.language), MockRewriteAdapter()
    )
    diff = diff_models(gym_agent, run.result)
    assert len(diff.text_changes) == 3
    assert {c.state for c in diff.text_changes} == {
        "Greeting",
        "TrainingPlan",
        "Nutrition",
    }
    assert not diff.added_states and not diff.removed_states
    assert not diff.added_intents and not diff.removed_intents


def test_diff_identity(gym_agent):
    assert diff_models(gym_agent, gym_agent).is_empty


def test_diff_reports_added_state(gym_agent):
    extra = replace(
        gym_agent,
        states=gym_agent.states + (State("Manual", transitions=()),),
    )
    diff = diff_models(gym_agent, extra)
    assert diff.added_states == ("Manual",)
    assert not diff.text_changes


def test_diff_strict_raises_on_shape_mismatch(gym_agent):
    extra = replace(
        gym_agent,
        states=gym_agent.states + (State("Manual", transitions=()),),
    )
    with pytest.raises(ShapeMismatchError):
        diff_models(gym_agent, extra, strict=True)


@given(agent_models())
@settings(max_examples=50)
def test_diff_self_is_empty(model):
    assert diff_models(model, model).is_empty

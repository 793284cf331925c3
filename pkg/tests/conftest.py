from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import pytest

from personaforge.dsl import load_workspace
from personaforge.model import AgentModel, ModelWorkspace, State, resolve_mapping

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GYM_WORKSPACE = FIXTURES / "gym"


@pytest.fixture(scope="session")
def gym_workspace() -> ModelWorkspace:
    workspace, diagnostics = load_workspace(GYM_WORKSPACE)
    assert not diagnostics, [str(d) for d in diagnostics]
    return workspace


@pytest.fixture(scope="session")
def gym_agent(gym_workspace) -> AgentModel:
    return gym_workspace.agents["gym"]


@pytest.fixture(scope="session")
def elderly_triple(gym_workspace):
    mapping = next(m for m in gym_workspace.mappings if m.user_profile == "elderly")
    return resolve_mapping(gym_workspace, mapping)


@pytest.fixture(scope="session")
def paraplegic_triple(gym_workspace):
    mapping = next(m for m in gym_workspace.mappings if m.user_profile == "paraplegic")
    return resolve_mapping(gym_workspace, mapping)


def replace_state(model: AgentModel, state: State) -> AgentModel:
    """Return a copy of the model with one state swapped by id."""
    states = tuple(state if s.id == state.id else s for s in model.states)
    return replace(model, states=states)

"""Well-formedness and cross-model consistency checks.

Finding codes are stable so tooling can assert on them:

  E001 missing or unresolved initial state
  E002 dangling transition endpoint
  E003 dangling intent reference
  E004 state unreachable from the initial state
  E005 automatic transition mixed with other transitions
  E006 predefined action with empty text
  E007 automatic-transition cycle
  W001 intent declared but never used
  E101 mapping reference does not resolve
  E102 duplicate mapping for one (profile, agent) pair
  E103 speech output configured without a text2speech adapter
  W101 content adaptation enabled but the profile has nothing to adapt to
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ShapeMismatchError
from .model import AgentModel, ModelWorkspace


@dataclass(frozen=True)
class Finding:
    code: str
    severity: str  # "error" | "warning"
    message: str
    subject: str

    def __str__(self) -> str:
        return f"{self.code} {self.severity}: {self.message} [{self.subject}]"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def passed(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    def codes(self) -> tuple[str, ...]:
        return tuple(f.code for f in self.findings)

    def by_code(self, code: str) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.code == code)


def validate_agent(model: AgentModel) -> ValidationReport:
    """Check one agent model beyond syntax; every problem becomes a finding."""
    findings: list[Finding] = []
    state_ids = set(model.state_ids())
    intent_ids = set(model.intent_ids())

    if not model.initial_state or model.initial_state not in state_ids:
        findings.append(
            Finding(
                "E001",
                "error",
                f"initial state {model.initial_state!r} is missing or unresolved",
                model.id,
            )
        )

    used_intents: set[str] = set()
    for state in model.states:
        automatic = [t for t in state.transitions if t.is_automatic]
        if automatic and len(state.transitions) > 1:
            findings.append(
                Finding(
                    "E005",
                    "error",
                    f"state {state.id!r} has an automatic transition plus "
                    f"{len(state.transitions) - 1} other transition(s)",
                    state.id,
                )
            )
        for transition in state.transitions:
            if transition.target not in state_ids:
                findings.append(
                    Finding(
                        "E002",
                        "error",
                        f"transition from {state.id!r} targets unknown state "
                        f"{transition.target!r}",
                        state.id,
                    )
                )
            if transition.source != state.id:
                findings.append(
                    Finding(
                        "E002",
                        "error",
                        f"transition recorded in state {state.id!r} claims source "
                        f"{transition.source!r}",
                        state.id,
                    )
                )
            if transition.condition is not None:
                used_intents.add(transition.condition.intent)
                if transition.condition.intent not in intent_ids:
                    findings.append(
                        Finding(
                            "E003",
                            "error",
                            f"transition from {state.id!r} references unknown "
                            f"intent {transition.condition.intent!r}",
                            state.id,
                        )
                    )
        for action in state.body.actions:
            if action.kind == "predefined_response" and not action.text:
                findings.append(
                    Finding(
                        "E006",
                        "error",
                        f"predefined response in state {state.id!r} has empty text",
                        state.id,
                    )
                )

    for state_id in _unreachable_states(model):
        findings.append(
            Finding(
                "E004",
                "error",
                f"state {state_id!r} is unreachable from the initial state",
                state_id,
            )
        )

    for cycle in _automatic_cycles(model):
        findings.append(
            Finding(
                "E007",
                "error",
                "automatic transitions form a cycle: " + " -> ".join(cycle),
                cycle[0],
            )
        )

    for intent in model.intents:
        if intent.id not in used_intents:
            findings.append(
                Finding(
                    "W001",
                    "warning",
                    f"intent {intent.id!r} is declared but never used",
                    intent.id,
                )
            )

    return ValidationReport(tuple(findings))


def _unreachable_states(model: AgentModel) -> list[str]:
    """States not reachable from the initial state, in declaration order.

    Traversal is an explicit-stack depth-first search over all transitions
    (automatic and intent alike); dangling targets are skipped.
    """
    state_ids = set(model.state_ids())
    if model.initial_state not in state_ids:
        return []
    transitions = {
        state.id: [t.target for t in state.transitions] for state in model.states
    }
    visited: set[str] = set()
    stack = [model.initial_state]
    while stack:
        current = stack.pop()
        if current in visited:
            continue
        visited.add(current)
        for target in transitions.get(current, []):
            if target in state_ids and target not in visited:
                stack.append(target)
    return [state.id for state in model.states if state.id not in visited]


def _automatic_cycles(model: AgentModel) -> list[list[str]]:
    """Cycles in the automatic-transition graph (at most one auto edge per state)."""
    successor: dict[str, str] = {}
    for state in model.states:
        auto = state.automatic_transition
        if auto is not None:
            successor[state.id] = auto.target
    cycles: list[list[str]] = []
    resolved: set[str] = set()
    for state in model.states:
        if state.id in resolved:
            continue
        path: list[str] = []
        seen_at: dict[str, int] = {}
        current = state.id
        while current in successor and current not in resolved:
            if current in seen_at:
                cycles.append(path[seen_at[current] :] + [current])
                break
            seen_at[current] = len(path)
            path.append(current)
            current = successor[current]
        resolved.update(path)
    return cycles


def validate_workspace(workspace: ModelWorkspace) -> ValidationReport:
    """Aggregate per-agent reports and add cross-model checks."""
    findings: list[Finding] = []
    for agent in workspace.agents.values():
        findings.extend(validate_agent(agent).findings)

    seen_pairs: set[tuple[str, str]] = set()
    for mapping in workspace.mappings:
        subject = f"{mapping.user_profile}->{mapping.agent}"
        for kind, ref, collection in (
            ("user profile", mapping.user_profile, workspace.profiles),
            ("agent", mapping.agent, workspace.agents),
            ("configuration", mapping.configuration, workspace.configurations),
        ):
            if ref not in collection:
                findings.append(
                    Finding(
                        "E101",
                        "error",
                        f"mapping references unknown {kind} {ref!r}",
                        subject,
                    )
                )
        if mapping.pair in seen_pairs:
            findings.append(
                Finding(
                    "E102",
                    "error",
                    f"duplicate mapping for profile {mapping.user_profile!r} and "
                    f"agent {mapping.agent!r}",
                    subject,
                )
            )
        seen_pairs.add(mapping.pair)

        configuration = workspace.configurations.get(mapping.configuration)
        profile = workspace.profiles.get(mapping.user_profile)
        if (
            configuration is not None
            and profile is not None
            and configuration.content.adapt_to_user_profile
            and not profile.abilities
            and not profile.preferences
        ):
            findings.append(
                Finding(
                    "W101",
                    "warning",
                    f"configuration {configuration.id!r} adapts content but profile "
                    f"{profile.id!r} has no abilities or preferences",
                    subject,
                )
            )

    for configuration in workspace.configurations.values():
        if (
            "speech" in configuration.modality.output
            and not configuration.technology.text2speech
        ):
            findings.append(
                Finding(
                    "E103",
                    "error",
                    f"configuration {configuration.id!r} outputs speech without a "
                    "text2speech adapter",
                    configuration.id,
                )
            )

    return ValidationReport(tuple(findings))


# ---------------------------------------------------------------------------
# Model diffing


@dataclass(frozen=True)
class TextChange:
    state: str
    action_index: int
    original: str
    adapted: str


@dataclass(frozen=True)
class ModelDiff:
    text_changes: tuple[TextChange, ...] = ()
    added_states: tuple[str, ...] = ()
    removed_states: tuple[str, ...] = ()
    added_intents: tuple[str, ...] = ()
    removed_intents: tuple[str, ...] = ()
    reshaped_states: tuple[str, ...] = field(default=())

    @property
    def is_empty(self) -> bool:
        return not (
            self.text_changes
            or self.added_states
            or self.removed_states
            or self.added_intents
            or self.removed_intents
            or self.reshaped_states
        )


def diff_models(base: AgentModel, adapted: AgentModel, strict: bool = False) -> ModelDiff:
    """Compare two agent models, pairing predefined texts positionally.

    With strict=True a difference in state or intent identifier sets raises
    ShapeMismatchError instead of being reported as added/removed entries.
    """
    base_states = {state.id: state for state in base.states}
    adapted_states = {state.id: state for state in adapted.states}
    added_states = tuple(s.id for s in adapted.states if s.id not in base_states)
    removed_states = tuple(s.id for s in base.states if s.id not in adapted_states)
    added_intents = tuple(
        i for i in adapted.intent_ids() if i not in set(base.intent_ids())
    )
    removed_intents = tuple(
        i for i in base.intent_ids() if i not in set(adapted.intent_ids())
    )

    if strict and (added_states or removed_states or added_intents or removed_intents):
        raise ShapeMismatchError(
            "models do not share state/intent identifier sets; "
            f"added states {list(added_states)}, removed states {list(removed_states)}, "
            f"added intents {list(added_intents)}, removed intents {list(removed_intents)}"
        )

    text_changes: list[TextChange] = []
    reshaped: list[str] = []
    for state in base.states:
        other = adapted_states.get(state.id)
        if other is None:
            continue
        base_actions = state.body.actions
        other_actions = other.body.actions
        shapes_match = len(base_actions) == len(other_actions) and all(
            a.kind == b.kind for a, b in zip(base_actions, other_actions)
        )
        if not shapes_match:
            reshaped.append(state.id)
            continue
        for index, (a, b) in enumerate(zip(base_actions, other_actions)):
            if a.kind == "predefined_response" and a.text != b.text:
                text_changes.append(TextChange(state.id, index, a.text, b.text))

    return ModelDiff(
        text_changes=tuple(text_changes),
        added_states=added_states,
        removed_states=removed_states,
        added_intents=added_intents,
        removed_intents=removed_intents,
        reshaped_states=tuple(reshaped),
    )

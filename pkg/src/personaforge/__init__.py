"""personaforge: model, personalize, compile and run conversational agents.

The pipeline has four steps: parse and validate the textual models
(user profiles, agents, configurations, mappings), rewrite the agent's
predefined responses per configuration through a text-rewriting adapter,
compile the result into a self-contained bundle with runtime directives,
and run that bundle as a chat session behind an HTTP service.
"""

__version__ = "0.1.0"

from .bundle import AgentBundle, generate_bundle, read_bundle, write_bundle
from .model import (
    AgentConfiguration,
    AgentModel,
    ModelWorkspace,
    PersonalizationMapping,
    UserProfile,
)
from .personalize import apply_design_time, plan_aspects
from .runtime import ChatSession, SessionEvent, classify_intent, create_session, step
from .validate import diff_models, validate_agent, validate_workspace

__all__ = [
    "__version__",
    "AgentBundle",
    "AgentConfiguration",
    "AgentModel",
    "ChatSession",
    "ModelWorkspace",
    "PersonalizationMapping",
    "SessionEvent",
    "UserProfile",
    "apply_design_time",
    "classify_intent",
    "create_session",
    "diff_models",
    "generate_bundle",
    "plan_aspects",
    "read_bundle",
    "step",
    "validate_agent",
    "validate_workspace",
    "write_bundle",
]

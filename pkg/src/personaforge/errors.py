"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class PersonaForgeError(Exception):
    """Base class for all errors raised by this package."""


class DanglingReferenceError(PersonaForgeError):
    """A cross-model reference does not resolve within the workspace."""

    def __init__(self, kind: str, ref_id: str):
        super().__init__(f"unknown {kind}: {ref_id!r}")
        self.kind = kind
        self.ref_id = ref_id


class UnknownStateError(PersonaForgeError):
    """A state id does not resolve within an agent model."""


class DuplicateMappingError(PersonaForgeError):
    """A second mapping was registered for the same (profile, agent) pair."""


class ShapeMismatchError(PersonaForgeError):
    """Two models compared in strict mode do not share identifier sets."""


class AdapterError(PersonaForgeError):
    """A text-rewriting or generation adapter failed."""


class AdapterConfigError(AdapterError):
    """The live adapter endpoint is not configured."""


class CountMismatchError(AdapterError):
    """An adapter returned a numbered list with the wrong item count."""

    def __init__(self, expected: int, got: int):
        super().__init__(f"adapter returned {got} items, expected {expected}")
        self.expected = expected
        self.got = got


class MalformedResponseError(AdapterError):
    """An adapter response could not be parsed as a numbered list."""


class ValidationFailedError(PersonaForgeError):
    """A model failed validation at a point where validity is required."""


class BundleError(PersonaForgeError):
    """Base class for agent-bundle IO problems."""


class DigestMismatchError(BundleError):
    """The bundle content does not match its recorded digest."""


class UnsupportedVersionError(BundleError):
    """The bundle or interchange document uses an unknown schema version."""


class InvalidBundleError(BundleError):
    """The bundle is unusable at runtime (bad digest, broken structure)."""


class NoFallbackIntentError(PersonaForgeError):
    """No intent matched and the agent declares no fallback intent."""


class NoTransitionError(PersonaForgeError):
    """The classified intent has no outgoing transition from the current state."""

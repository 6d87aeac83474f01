"""Error types shared across the toolkit.

Every failure that can cross a module boundary derives from
:class:`DmkfError`, whose class name doubles as the stable
machine-readable error class used by the CLI and the HTTP API.
"""

from __future__ import annotations


class DmkfError(Exception):
    """Base error; ``error_class`` is stable across releases."""

    def __init__(self, message: str, element: str | None = None):
        super().__init__(message)
        self.element = element

    @property
    def error_class(self) -> str:
        return type(self).__name__


class UsageError(DmkfError):
    """Bad arguments or a malformed request."""


class UnknownElement(DmkfError):
    """An element path does not resolve against the loaded plans."""


class UnknownConcept(DmkfError):
    """A concept name does not exist in the registry for the phase."""


class CandidateViolation(DmkfError):
    """A mapping target lies outside the element's filtered candidate set."""


class StaleSession(DmkfError):
    """A mapping session outlived the registry it was opened against."""


class NoCandidates(DmkfError):
    """The registry offers no concept for a stereotype/phase pair."""


class ValidationGate(DmkfError):
    """Transfer refused because the plan has error-severity diagnostics."""


class IntegrityViolation(DmkfError):
    """A repository write or load would leave a dangling reference."""


class RegistryMismatch(DmkfError):
    """Incoming records were produced under a different registry."""


class SupersessionConflict(DmkfError):
    """A commit raced a concurrent change to the same element's mapping."""

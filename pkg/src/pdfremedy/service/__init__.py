"""Session workflow engine and HTTP API."""

from .app import create_app
from .store import (
    BadStepPayload, RevisionConflict, Session, SessionStore, UnknownSession,
    ValidationFailed,
)

__all__ = [
    "create_app", "SessionStore", "Session", "UnknownSession",
    "RevisionConflict", "ValidationFailed", "BadStepPayload",
]

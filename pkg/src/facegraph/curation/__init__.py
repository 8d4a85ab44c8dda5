"""Interactive cluster review: event-sourced sessions and the HTTP service."""

from .state import (
    ACTION_KINDS,
    CONFIRMED,
    PENDING,
    REJECTED,
    CurationAction,
    CurationState,
    Session,
    SessionStore,
    replay,
    states_equal,
)

__all__ = [
    "ACTION_KINDS",
    "CONFIRMED",
    "PENDING",
    "REJECTED",
    "CurationAction",
    "CurationState",
    "Session",
    "SessionStore",
    "replay",
    "states_equal",
]

"""Interactive session service: HTTP control plane plus event streaming."""

from .app import create_app
from .manager import (
    CapacityExceeded,
    ControlState,
    EmptyHint,
    ServiceError,
    Session,
    SessionManager,
    SessionTerminal,
    UnknownSession,
)

__all__ = [
    "CapacityExceeded",
    "ControlState",
    "EmptyHint",
    "ServiceError",
    "Session",
    "SessionManager",
    "SessionTerminal",
    "UnknownSession",
    "create_app",
]

"""Budgeted, transcribed chat access for one session.

The ChatClient is the only path through which agents reach a completion
provider: it enforces the call budget before any network activity,
validates history, and logs the LLM_REQUEST/LLM_RESPONSE event pair.
One call to ``chat`` is one API call however many transport retries
happen underneath.
"""

from __future__ import annotations

from typing import Any, Optional, Sequence

from ..model import BudgetExceeded, CallMeter
from ..transcript import EventKind, Transcript
from .messages import ChatMessage, Role, validate_history
from .providers import ChatBackend


class ChatClient:
    def __init__(
        self,
        backend: ChatBackend,
        meter: CallMeter,
        transcript: Optional[Transcript] = None,
    ):
        self.backend = backend
        self.meter = meter
        self.transcript = transcript

    def _log(self, kind: EventKind, payload: dict[str, Any]) -> None:
        if self.transcript is not None:
            self.transcript.append(kind, payload)

    def chat(
        self,
        history: Sequence[ChatMessage],
        tools: Sequence[dict[str, Any]] = (),
    ) -> ChatMessage:
        """One completion turn.

        Raises BudgetExceeded before sending anything once the meter is
        spent, and MalformedHistory on an invalid conversation.  The
        meter is charged as soon as the request goes out; a provider
        failure after that still consumed the call.
        """
        history = list(history)
        validate_history(history, for_completion=True)
        if self.meter.remaining <= 0:
            raise BudgetExceeded(
                f"api call budget of {self.meter.limit} exhausted"
            )
        self.meter.acquire("chat")
        self._log(
            EventKind.LLM_REQUEST,
            {
                "messages": [m.to_dict() for m in history],
                "tools": [
                    t.get("function", {}).get("name", "") for t in tools
                ],
            },
        )
        reply = self.backend.complete(history, list(tools))
        if reply.role is not Role.ASSISTANT:
            raise ValueError("backend returned a non-assistant message")
        self._log(EventKind.LLM_RESPONSE, {"message": reply.to_dict()})
        return reply

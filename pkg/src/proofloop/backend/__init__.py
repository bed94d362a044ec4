"""LLM access: message model, providers, budgeted chat client."""

from .chat import ChatClient  # noqa: F401
from .config import BackendConfig, ProviderKind  # noqa: F401
from .messages import (  # noqa: F401
    ChatMessage,
    MalformedHistory,
    Role,
    ToolCallRequest,
    assistant,
    system,
    tool_result,
    user,
    validate_history,
)
from .providers import (  # noqa: F401
    ChatBackend,
    HttpChatBackend,
    ProviderError,
    ScriptedBackend,
    ScriptExhausted,
    ScriptParseError,
    build_backend,
    load_script,
    write_script,
)

"""Backend selection and tuning."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional


class ProviderKind(str, Enum):
    HTTP_PROVIDER = "HTTP_PROVIDER"
    SCRIPTED = "SCRIPTED"


@dataclass(frozen=True)
class BackendConfig:
    provider: ProviderKind
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""
    temperature: float = 1.0
    max_output_tokens: int = 4096
    request_timeout: float = 60.0
    script_path: str = ""

    def __post_init__(self) -> None:
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.provider is ProviderKind.HTTP_PROVIDER and not self.endpoint:
            raise ValueError("HTTP provider requires an endpoint")
        if self.provider is ProviderKind.SCRIPTED and not self.script_path:
            raise ValueError("scripted provider requires a script path")

    def to_dict(self) -> dict[str, Any]:
        return {
            "provider": self.provider.value,
            "endpoint": self.endpoint,
            "model": self.model,
            "api_key_env": self.api_key_env,
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "request_timeout": self.request_timeout,
            "script_path": self.script_path,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BackendConfig":
        return cls(
            provider=ProviderKind(d["provider"]),
            endpoint=d.get("endpoint", ""),
            model=d.get("model", ""),
            api_key_env=d.get("api_key_env", ""),
            temperature=d.get("temperature", 1.0),
            max_output_tokens=d.get("max_output_tokens", 4096),
            request_timeout=d.get("request_timeout", 60.0),
            script_path=d.get("script_path", ""),
        )

    @classmethod
    def scripted(cls, script_path: str) -> "BackendConfig":
        return cls(provider=ProviderKind.SCRIPTED, script_path=script_path)

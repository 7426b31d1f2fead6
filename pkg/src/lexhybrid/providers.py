"""HTTP plumbing for the external embedding and generation providers.

Wire contracts:
  embedder    POST {"texts": [...]}                     -> {"vectors": [[f64; 384], ...]}
  generator   POST {"prompt", "temperature", "max_tokens"} -> {"text": "..."}

Endpoints can be overridden via LEXHYBRID_EMBEDDER_URL and
LEXHYBRID_GENERATOR_URL.
"""

import os
from dataclasses import dataclass

from .errors import ProviderShapeError, ProviderUnavailable

EMBEDDER_URL_ENV = "LEXHYBRID_EMBEDDER_URL"
GENERATOR_URL_ENV = "LEXHYBRID_GENERATOR_URL"

GENERATION_TEMPERATURE = 0.1
CONTEXT_BUDGET_TOKENS = 8192


def post_json(url: str, payload: dict, timeout_ms: int = 10_000) -> dict:
    """POST JSON and return the decoded JSON body.

    Network failures and timeouts surface as ProviderUnavailable so
    callers can retry or degrade.
    """
    import requests

    try:
        response = requests.post(url, json=payload, timeout=timeout_ms / 1000.0)
        response.raise_for_status()
        return response.json()
    except requests.RequestException as exc:
        raise ProviderUnavailable(f"{url}: {exc}") from exc


def embedder_endpoint(default: str | None = None) -> str | None:
    return os.environ.get(EMBEDDER_URL_ENV, default)


def generator_endpoint(default: str | None = None) -> str | None:
    return os.environ.get(GENERATOR_URL_ENV, default)


@dataclass(frozen=True)
class GeneratorConfig:
    endpoint: str | None = None
    temperature: float = GENERATION_TEMPERATURE
    max_tokens: int = 1024
    timeout_ms: int = 30_000


class GenerationClient:
    """Client for the external text-generation provider."""

    def __init__(self, cfg: GeneratorConfig, transport=post_json):
        if not cfg.endpoint:
            raise ValueError("generation client requires an endpoint")
        self.cfg = cfg
        self._transport = transport

    def generate(self, prompt: str) -> str:
        request = {
            "prompt": prompt,
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        }
        last_error: Exception | None = None
        for _ in range(2):  # one retry
            try:
                response = self._transport(
                    self.cfg.endpoint, request, timeout_ms=self.cfg.timeout_ms
                )
            except ProviderUnavailable as exc:
                last_error = exc
                continue
            if not isinstance(response, dict) or "text" not in response:
                raise ProviderShapeError("generator response missing 'text'")
            return str(response["text"])
        raise ProviderUnavailable(str(last_error))

"""Minimal HTTP client for OpenAI-style chat-completion endpoints.

Configuration comes from the environment:

  PF_LLM_URL    endpoint URL (e.g. https://host/v1/chat/completions)
  PF_LLM_KEY    bearer token, optional
  PF_LLM_MODEL  model name, optional

The deterministic mock adapters never touch this module, so every test and
CI run stays offline.
"""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request

from .errors import AdapterConfigError, AdapterError

ENV_URL = "PF_LLM_URL"
ENV_KEY = "PF_LLM_KEY"
ENV_MODEL = "PF_LLM_MODEL"


class LlmEndpoint:
    """One configured chat-completion endpoint."""

    def __init__(
        self,
        url: str | None = None,
        key: str | None = None,
        model: str | None = None,
        timeout: float = 60.0,
    ):
        self.url = url if url is not None else os.environ.get(ENV_URL, "")
        self.key = key if key is not None else os.environ.get(ENV_KEY, "")
        self.model = model if model is not None else os.environ.get(ENV_MODEL, "")
        self.timeout = timeout
        if not self.url:
            raise AdapterConfigError(
                f"no LLM endpoint configured; set {ENV_URL} (and optionally "
                f"{ENV_KEY}, {ENV_MODEL}) or use the mock adapter"
            )

    def chat(self, system_prompt: str, user_payload: str) -> str:
        body: dict = {
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_payload},
            ]
        }
        if self.model:
            body["model"] = self.model
        request = urllib.request.Request(
            self.url,
            data=json.dumps(body).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        if self.key:
            request.add_header("Authorization", f"Bearer {self.key}")
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise AdapterError(f"LLM endpoint request failed: {exc}") from exc
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise AdapterError(
                "LLM endpoint returned an unexpected response shape"
            ) from exc

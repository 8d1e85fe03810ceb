"""Completion backends: an OpenAI-style HTTP client and an offline stub.

The HTTP backend reads MUSE_LLM_URL, MUSE_LLM_KEY and MUSE_LLM_MODEL
from the environment when not configured explicitly.
"""

from __future__ import annotations

import json
import os
import re
import socket
import urllib.error
import urllib.request
from typing import Optional

from ..errors import BackendTimeout, ModuleFailure

DEFAULT_TIMEOUT_SEC = 60.0

ENV_URL = "MUSE_LLM_URL"
ENV_KEY = "MUSE_LLM_KEY"
ENV_MODEL = "MUSE_LLM_MODEL"


class CompletionBackend:
    def complete(self, prompt: str) -> str:
        raise NotImplementedError


class HttpBackend(CompletionBackend):
    """POSTs {model, messages} and returns choices[0].message.content."""

    def __init__(self, url: Optional[str] = None,
                 api_key: Optional[str] = None,
                 model: Optional[str] = None,
                 timeout: float = DEFAULT_TIMEOUT_SEC) -> None:
        self.url = url or os.environ.get(ENV_URL, "")
        self.api_key = api_key or os.environ.get(ENV_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "default")
        self.timeout = timeout
        if not self.url:
            raise ModuleFailure("backend",
                                f"no endpoint configured; set {ENV_URL}")

    def complete(self, prompt: str) -> str:
        body = json.dumps({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        request = urllib.request.Request(self.url, data=body,
                                         headers=headers, method="POST")
        try:
            with urllib.request.urlopen(request,
                                        timeout=self.timeout) as response:
                raw = json.loads(response.read().decode("utf-8"))
        except socket.timeout as exc:
            raise BackendTimeout(
                f"no reply within {self.timeout:g} s") from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, socket.timeout):
                raise BackendTimeout(
                    f"no reply within {self.timeout:g} s") from exc
            raise ModuleFailure("backend", str(exc)) from exc
        try:
            return str(raw["choices"][0]["message"]["content"])
        except (KeyError, IndexError, TypeError) as exc:
            raise ModuleFailure("backend",
                                f"malformed completion payload: {exc}") from exc


class StubBackend(CompletionBackend):
    """Deterministic offline backend; echoes what it was shown."""

    PREVIEW_CHARS = 160

    def complete(self, prompt: str) -> str:
        parts = re.split(r"^## ([A-Z_]+)$\n", prompt, flags=re.MULTILINE)
        # parts = [head, label, content, label, content, ...]
        sections = list(zip(parts[1::2], parts[2::2]))
        question = ""
        previews = []
        for label, content in sections:
            content = content.strip()
            if label == "QUESTION":
                question = content
                continue
            clipped = content[:self.PREVIEW_CHARS]
            previews.append(f"{label}: {clipped}")
        labels = [l for l, _ in sections if l != "QUESTION"]
        listed = ", ".join(labels) if labels else "none"
        lines = [f"[stub] context sections: {listed}; question: {question}"]
        lines.extend(previews)
        return "\n".join(lines)

"""Chat-completion client used to turn lyric/emotion tuples into scene prompts."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol

import httpx


class LlmError(RuntimeError):
    """The language-model endpoint failed or returned garbage."""


class LlmClient(Protocol):
    def complete(self, system: str, user: str) -> str: ...


@dataclass(frozen=True)
class MockLlmClient:
    """Deterministic offline client: one templated scene line per input item.

    Expects the user message to enumerate items as produced by
    timeline.build_prompt_request and answers with numbered lines
    "Scene: <lyric or mood> in <emotion> light".
    """

    def complete(self, system: str, user: str) -> str:
        lines = []
        pattern = re.compile(
            r"^(\d+)\. \[t=[^\]]+\] emotion=(\w+) lyric=(.*)$", re.MULTILINE
        )
        for match in pattern.finditer(user):
            idx, emotion, lyric = match.groups()
            subject = "the instrumental mood" if lyric == "[instrumental]" else lyric
            lines.append(f"{idx}. Scene: {subject} in {emotion} light")
        return "\n".join(lines)


@dataclass(frozen=True)
class HttpLlmClient:
    """Minimal chat-completions HTTP client: {system, user} -> text."""

    url: str
    timeout: float = 60.0
    model: str = "default"

    def complete(self, system: str, user: str) -> str:
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        try:
            resp = httpx.post(self.url, json=payload, timeout=self.timeout)
            resp.raise_for_status()
            data = resp.json()
        except httpx.HTTPError as e:
            raise LlmError(f"LLM request failed: {e}") from e
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise LlmError(f"unexpected LLM response shape: {data!r}") from e

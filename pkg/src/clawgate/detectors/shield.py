"""Structural prompt-injection detector.

Fires on shape only: imperative-override words and serialized role-boundary
tokens. Spans are str offsets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

IMPERATIVE_TOKENS = ("IGNORE", "DISREGARD", "OVERRIDE", "BYPASS", "FORGET", "PURGE")
ROLE_BOUNDARY_TOKENS = ("</system>", "<|im_end|>", "[/INST]", "<|system|>", "<|endoftext|>")

IMPERATIVE_OVERRIDE = "imperative-override"
ROLE_BOUNDARY_TOKEN = "role-boundary-token"

_IMPERATIVE_RE = re.compile(r"\b(?:" + "|".join(IMPERATIVE_TOKENS) + r")\b", re.IGNORECASE)
_ROLE_RE = re.compile("|".join(re.escape(t) for t in ROLE_BOUNDARY_TOKENS))


@dataclass(frozen=True)
class InjectionFinding:
    kind: str
    matched_token: str
    span: tuple[int, int]


def detect_injection(text: str) -> list[InjectionFinding]:
    findings = [
        InjectionFinding(IMPERATIVE_OVERRIDE, m.group(0).upper(), m.span())
        for m in _IMPERATIVE_RE.finditer(text)
    ]
    findings += [
        InjectionFinding(ROLE_BOUNDARY_TOKEN, m.group(0), m.span()) for m in _ROLE_RE.finditer(text)
    ]
    findings.sort(key=lambda f: (f.span, f.kind))
    return findings

"""Regex DLP scanner for secrets and PII.

The catalog is an ordered, append-only list. ``widen_catalog`` appends the
widened tier and relaxes one character in the AWS key boundary; every other
strict pattern stays byte-identical.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence


class Severity(enum.IntEnum):
    LOW = 1
    MEDIUM = 2
    HIGH = 3
    CRITICAL = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: "str | Severity") -> "Severity":
        if isinstance(value, Severity):
            return value
        return cls[value.upper()]


STRICT = "strict"
WIDENED = "widened"

# Secret tokens must not be glued onto a longer word/base64 run.
_LEFT = r"(?<![A-Za-z0-9_+/=-])"

AWS_STRICT = _LEFT + r"AKIA[0-9A-Z]{16}(?![A-Za-z0-9])"
AWS_RELAXED = r"(?<![A-Za-z0-9+/=-])AKIA[0-9A-Z]{16}(?![A-Za-z0-9])"


def luhn_ok(digits: str) -> bool:
    total = 0
    for i, ch in enumerate(reversed(digits)):
        d = ord(ch) - 48
        if i % 2 == 1:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    return total % 10 == 0


_VALIDATORS = {"luhn": lambda s: luhn_ok(re.sub(r"[ -]", "", s))}


@dataclass(frozen=True)
class DlpPattern:
    id: str
    severity: Severity
    pattern: str
    tier: str = STRICT
    validator: str | None = None

    @cached_property
    def regex(self) -> re.Pattern:
        return re.compile(self.pattern)

    def to_dict(self) -> dict:
        d = {"id": self.id, "severity": self.severity.label, "pattern": self.pattern, "tier": self.tier}
        if self.validator:
            d["validator"] = self.validator
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DlpPattern":
        validator = d.get("validator")
        if validator is not None and validator not in _VALIDATORS:
            raise ValueError(f"unknown validator {validator!r}")
        return cls(d["id"], Severity.parse(d["severity"]), d["pattern"], d.get("tier", STRICT), validator)


@dataclass(frozen=True)
class DlpCatalog:
    patterns: tuple[DlpPattern, ...]

    def __post_init__(self) -> None:
        ids = [p.id for p in self.patterns]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate pattern ids in catalog")

    def __iter__(self):
        return iter(self.patterns)

    def __len__(self) -> int:
        return len(self.patterns)

    def __getitem__(self, pattern_id: str) -> DlpPattern:
        for p in self.patterns:
            if p.id == pattern_id:
                return p
        raise KeyError(pattern_id)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.patterns]

    @property
    def widened(self) -> bool:
        return any(p.tier == WIDENED for p in self.patterns)

    def to_json(self) -> str:
        return json.dumps([p.to_dict() for p in self.patterns], indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DlpCatalog":
        return cls(tuple(DlpPattern.from_dict(d) for d in json.loads(text)))

    @classmethod
    def load(cls, path: str | Path) -> "DlpCatalog":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


STRICT_PATTERNS = (
    DlpPattern("openai_api_key", Severity.HIGH, _LEFT + r"sk-[A-Za-z0-9_-]{20,}"),
    DlpPattern("aws_access_key_id", Severity.HIGH, AWS_STRICT),
    DlpPattern("github_token", Severity.HIGH, _LEFT + r"gh[pousr]_[A-Za-z0-9]{36}(?![A-Za-z0-9])"),
    DlpPattern("stripe_secret_key", Severity.HIGH, _LEFT + r"[sr]k_(?:live|test)_[A-Za-z0-9]{24,}"),
    DlpPattern("jwt", Severity.HIGH, _LEFT + r"eyJ[A-Za-z0-9_-]{8,}\.[A-Za-z0-9_-]{8,}\.[A-Za-z0-9_-]{8,}"),
    DlpPattern("credit_card", Severity.HIGH, r"(?<![\d+-])\d(?:[ -]?\d){12,18}(?!\d)", validator="luhn"),
    DlpPattern("email", Severity.MEDIUM, r"(?<![A-Za-z0-9._%+-])[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}\b"),
    DlpPattern("phone_e164", Severity.MEDIUM, r"(?<![\w+])\+[1-9]\d{7,14}(?!\d)"),
)

WIDENED_PATTERNS = (
    DlpPattern("openai_key_short", Severity.HIGH, r"\bsk-[A-Za-z0-9]{4,}", WIDENED),
    DlpPattern("aws_key_short", Severity.HIGH, r"\bAKIA[0-9A-Z]{4,}", WIDENED),
    DlpPattern("slack_token", Severity.HIGH, r"\bxox[abposr]-[A-Za-z0-9-]{3,}", WIDENED),
    DlpPattern(
        "glued_secret_prefix",
        Severity.HIGH,
        r"(?:AKIA[0-9A-Z]{16}|gh[pousr]_[A-Za-z0-9]{36})(?![A-Za-z0-9])|(?<=[\w=])sk-[A-Za-z0-9]{20,}",
        WIDENED,
    ),
    DlpPattern("openai_key_padded", Severity.HIGH, r"\bsk-=+[A-Za-z0-9_=-]{8,}", WIDENED),
)


def strict_catalog() -> DlpCatalog:
    return DlpCatalog(STRICT_PATTERNS)


def widen_catalog(catalog: DlpCatalog) -> DlpCatalog:
    if catalog.widened:
        raise ValueError("catalog already carries the widened tier")
    patterns = []
    for p in catalog.patterns:
        if p.id == "aws_access_key_id" and p.pattern == AWS_STRICT:
            p = DlpPattern(p.id, p.severity, AWS_RELAXED, p.tier, p.validator)
        patterns.append(p)
    return DlpCatalog(tuple(patterns) + WIDENED_PATTERNS)


def widened_catalog() -> DlpCatalog:
    return widen_catalog(strict_catalog())


@dataclass(frozen=True)
class DlpFinding:
    pattern_id: str
    severity: Severity
    span: tuple[int, int]


def dlp_scan(text: str, catalog: DlpCatalog) -> list[DlpFinding]:
    findings = []
    for p in catalog:
        check = _VALIDATORS[p.validator] if p.validator else None
        for m in p.regex.finditer(text):
            if check is not None and not check(m.group(0)):
                continue
            findings.append(DlpFinding(p.id, p.severity, m.span()))
    return findings


@dataclass(frozen=True)
class BlockDecision:
    block: bool
    severity: str
    reason: str
    rule: str = ""


def aggregate(findings: Sequence[DlpFinding]) -> BlockDecision:
    if not findings:
        return BlockDecision(False, "none", "")
    top = max(f.severity for f in findings)
    if top >= Severity.HIGH:
        return BlockDecision(True, top.label, f"DLP findings (severity={top.label})", "any-high")
    mediums = {f.pattern_id for f in findings if f.severity == Severity.MEDIUM}
    if len(mediums) >= 2:
        return BlockDecision(True, "medium", "DLP findings (severity=medium)", "two-distinct-medium")
    return BlockDecision(False, top.label, "")


def redact(text: str, findings: Iterable[DlpFinding]) -> str:
    """Replace every finding span with ``[REDACTED:<patternId>]``.

    Overlapping spans merge; the merged run is labelled with its leftmost
    finding (catalog order breaks ties).
    """
    ordered = sorted(enumerate(findings), key=lambda t: (t[1].span[0], t[0]))
    merged: list[list] = []
    for _, f in ordered:
        start, end = f.span
        if merged and start < merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end, f.pattern_id])
    out = []
    pos = 0
    for start, end, pid in merged:
        out.append(text[pos:start])
        out.append(f"[REDACTED:{pid}]")
        pos = end
    out.append(text[pos:])
    return "".join(out)


def blocking_findings(text: str, catalog: DlpCatalog) -> list[DlpFinding]:
    return [f for f in dlp_scan(text, catalog) if f.severity >= Severity.HIGH]


def scrub_text(text: str, catalog: DlpCatalog, max_rounds: int = 8) -> str:
    """Redact every finding, secrets and PII alike, until a rescan is clean.

    A single pass can expose a token whose left boundary was the tail of a
    neighbouring secret, so this repeats to a fixed point.
    """
    for _ in range(max_rounds):
        findings = dlp_scan(text, catalog)
        if not findings:
            return text
        text = redact(text, findings)
    if blocking_findings(text, catalog):
        raise RuntimeError("scrub did not converge")
    return text

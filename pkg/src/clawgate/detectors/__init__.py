from .dlp import (
    BlockDecision,
    DlpCatalog,
    DlpFinding,
    DlpPattern,
    Severity,
    aggregate,
    dlp_scan,
    redact,
    scrub_text,
    strict_catalog,
    widen_catalog,
    widened_catalog,
)
from .shield import InjectionFinding, detect_injection

__all__ = [
    "BlockDecision",
    "DlpCatalog",
    "DlpFinding",
    "DlpPattern",
    "InjectionFinding",
    "Severity",
    "aggregate",
    "detect_injection",
    "dlp_scan",
    "redact",
    "scrub_text",
    "strict_catalog",
    "widen_catalog",
    "widened_catalog",
]

"""Mediating subjects and mock channel sinks.

A subject's gate sees a GateInput only: content, channel, probe tag and
sample id. Ground-truth labels never reach it. ``perform`` is the harness
playing the agent: it is the only place the F-category drives behaviour,
and it only touches the world (corpus) and the audit log, never the gate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from .. import audit
from ..audit import AuditChain
from ..detectors.dlp import DlpCatalog, Severity, aggregate, dlp_scan
from ..detectors.shield import detect_injection
from ..gatekeeper import AdmissionDecision, Witness, admit_extension, guard_egress_request
from ..policy import Capability, Policy
from ..reconcile import KeyedMultiset, VerdictKind, check_biconditional
from ..trust import Runtime, TrustRoot, lock_trust_root, public_key_bytes, seal_bootstrap, sign_manifest
from . import templates as T
from .samples import DISCORD, TELEGRAM, Sample

CHANNEL_LIMITS = {DISCORD: 1900, TELEGRAM: 3500}
CHANNEL_HOSTS = {DISCORD: "gateway.discord-mock.test", TELEGRAM: "api.telegram-mock.test"}
CHANNEL_CAPS = (Capability.PUBLISH, Capability.NET_EGRESS)

PROMPT_SHIELD_REASON = "prompt-shield findings"


def default_policy(channels) -> Policy:
    return Policy(
        allowed_channels=frozenset(channels),
        allowed_providers=frozenset(),
        egress_host_allowlist=frozenset({"*.discord-mock.test", "api.telegram-mock.test"}),
    )


class ChannelSink:
    """In-memory stand-in for a chat channel; clamps like the real platform."""

    def __init__(self, name: str, *, keep_posts: bool = True, pace_ms: int = 0):
        self.name = name
        self.max_len = CHANNEL_LIMITS[name]
        self.host = CHANNEL_HOSTS[name]
        self.keep_posts = keep_posts
        self.pace_ms = pace_ms
        self.posts: list[tuple[str, str]] = []
        self.count = 0

    def post(self, subject: str, text: str) -> str:
        text = text[: self.max_len]
        self.count += 1
        if self.keep_posts:
            self.posts.append((subject, text))
        if self.pace_ms:
            time.sleep(self.pace_ms / 1000.0)
        return text


@dataclass(frozen=True)
class GateInput:
    sample_id: str
    channel: str
    content: str
    probe_tag: str | None = None

    @classmethod
    def from_sample(cls, s: Sample) -> "GateInput":
        return cls(s.id, s.channel, s.content, s.probe_tag)


@dataclass(frozen=True)
class Decision:
    subject: str
    sample_id: str
    delivered: bool
    block_reason: str | None = None
    f_category_detected: str | None = None

    def __post_init__(self) -> None:
        if self.delivered != (self.block_reason is None):
            raise ValueError("delivered iff no block reason")


def block_notice(subject: str, fcat: str | None, reason: str) -> str:
    return f"[{subject} | {fcat or '--'}] message blocked: {reason}"


class CorpusDelta:
    """Real-world mutations, keyed by probe tag so each check stays scoped."""

    def __init__(self) -> None:
        self._by_tag: dict[str | None, KeyedMultiset] = {}

    def record(self, cap, target: str, probe_tag: str | None = None) -> None:
        self._by_tag.setdefault(probe_tag, KeyedMultiset()).add(cap, target)

    def project(self, probe_tag: str | None = None) -> KeyedMultiset:
        if probe_tag is not None:
            return self._by_tag.get(probe_tag, KeyedMultiset())
        out = KeyedMultiset()
        for ms in self._by_tag.values():
            for (cap, target), n in ms.items():
                out.add(cap, target, n)
        return out


def probe_target(channel: str, tag: str) -> str:
    return f"{channel}:probe/{tag}"


class PassthroughSubject:
    """Negative control: delivers everything, audits nothing."""

    has_audit = False

    def __init__(self, name: str, sinks: dict[str, ChannelSink]):
        self.name = name
        self.sinks = sinks

    def perform(self, sample: Sample) -> None:
        pass

    def mediate(self, gi: GateInput) -> Decision:
        self.sinks[gi.channel].post(self.name, gi.content)
        return Decision(self.name, gi.sample_id, True)

    def close(self) -> None:
        pass


class GatedSubject:
    """The full primitive stack: sealed runtime, admitted channel extensions,
    prompt shield, DLP, and per-probe biconditional reconciliation."""

    has_audit = True

    def __init__(
        self,
        name: str,
        sinks: dict[str, ChannelSink],
        policy: Policy,
        catalog: DlpCatalog,
        *,
        audit_path: str | Path | None = None,
        witness: Witness | None = None,
    ):
        self.name = name
        self.sinks = sinks
        self.catalog = catalog
        self.witness = witness
        self.corpus = CorpusDelta()

        publisher = Ed25519PrivateKey.generate()
        root = TrustRoot()
        root.add_signer(publisher.public_key())
        lock_trust_root(root)
        self.publisher_public_key = public_key_bytes(publisher.public_key()).hex()
        self.runtime = Runtime(root, policy, AuditChain(audit_path))
        seal_bootstrap(self.runtime)

        self.admissions: dict[str, AdmissionDecision] = {}
        self.granted: dict[str, frozenset] = {}
        for channel in sinks:
            content = f"clawgate mock channel extension: {channel}\n".encode()
            manifest = sign_manifest(publisher, f"{channel}-channel", "1.0.0", CHANNEL_CAPS, content)
            decision = admit_extension(self.runtime, manifest, content, witness=witness, channel=channel)
            self.admissions[channel] = decision
            self.granted[channel] = manifest.declared_capabilities if decision.admitted else frozenset()

    @property
    def audit(self) -> AuditChain:
        return self.runtime.audit

    @property
    def fail_closed(self) -> bool:
        return self.witness is not None and self.witness.state.failed_closed

    def perform(self, sample: Sample) -> None:
        # harness-as-agent: F2 forges a success record, LEGIT_AUDIT really acts
        if sample.probe_tag is None:
            return
        target = probe_target(sample.channel, sample.probe_tag)
        payload = {"cap": Capability.PUBLISH.value, "target": target, "ok": True, "probeTag": sample.probe_tag}
        if sample.f_category == T.LEGIT_AUDIT:
            self.corpus.record(Capability.PUBLISH, target, sample.probe_tag)
            self.audit.append(audit.EXECUTED, payload)
        elif sample.f_category == T.F2_FORGE:
            self.audit.append(audit.EXECUTED, payload)

    def _gate(self, gi: GateInput) -> tuple[str | None, str | None]:
        adm = self.admissions.get(gi.channel)
        if adm is None or not adm.admitted:
            return f"extension not admitted: {adm.reason.value if adm else 'NotLoaded'}", None
        if detect_injection(gi.content):
            return PROMPT_SHIELD_REASON, T.F1_BYPASS
        dlp = aggregate(dlp_scan(gi.content, self.catalog))
        if dlp.block:
            fcat = T.F3_SILENT if Severity.parse(dlp.severity) >= Severity.HIGH else T.F4_WRONGTGT
            return dlp.reason, fcat
        if gi.probe_tag is not None:
            verdict = check_biconditional(self.corpus.project(gi.probe_tag), self.audit.project_s(gi.probe_tag))
            if not verdict.ok:
                fcat = {
                    VerdictKind.F1_BYPASS: T.F1_BYPASS,
                    VerdictKind.F2_FORGERY: T.F2_FORGE,
                    VerdictKind.F4_WRONG_TARGET: T.F4_WRONGTGT,
                }[verdict.kind]
                return verdict.describe(), fcat
        sink = self.sinks[gi.channel]
        egress = guard_egress_request(self.runtime.policy, sink.host, self.granted[gi.channel])
        if not egress.allowed:
            return f"egress denied: {egress.reason.value}", None
        return None, None

    def mediate(self, gi: GateInput) -> Decision:
        reason, fcat = self._gate(gi)
        delivered = reason is None
        body = {
            "kind": "mediation",
            "sampleId": gi.sample_id,
            "channel": gi.channel,
            "delivered": delivered,
            "reason": reason,
            "fCategoryDetected": fcat,
        }
        payload = {**body, "cap": Capability.PUBLISH.value, "target": gi.channel, "ok": delivered}
        if gi.probe_tag is not None:
            payload["probeTag"] = gi.probe_tag
        if self.witness is not None and self.witness.available:
            payload["witness"] = self.witness.sign(body).to_dict()
        self.audit.append(audit.MEDIATION_DECISION, payload)

        sink = self.sinks[gi.channel]
        if delivered:
            sink.post(self.name, gi.content)
        elif self.admissions[gi.channel].admitted:
            sink.post(self.name, block_notice(self.name, fcat, reason))
        return Decision(self.name, gi.sample_id, delivered, reason, fcat)

    def close(self) -> None:
        self.audit.close()
        if self.witness is not None:
            self.witness.close()

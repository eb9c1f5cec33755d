"""Extension admission gate and two-layer egress guard.

The guards are decision functions; wiring them into a real request or socket
layer is left to the host runtime.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from . import audit
from .audit import canonicalize
from .policy import VOCABULARY, Capability, Policy, host_allowed, is_channel_allowed, is_provider_allowed
from .trust import ManifestCheck, ModuleManifest, Runtime, key_id, public_key_bytes, verify_manifest


class AdmissionReason(str, enum.Enum):
    OK = "Ok"
    UNKNOWN_SIGNER = "UnknownSigner"
    BAD_SIGNATURE = "BadSignature"
    DIGEST_MISMATCH = "DigestMismatch"
    UNDECLARED_CAPABILITY = "UndeclaredCapability"
    CHANNEL_DENIED = "ChannelDenied"
    WITNESS_UNAVAILABLE = "WitnessUnavailable"


_MANIFEST_REASONS = {
    ManifestCheck.UNKNOWN_SIGNER: AdmissionReason.UNKNOWN_SIGNER,
    ManifestCheck.BAD_SIGNATURE: AdmissionReason.BAD_SIGNATURE,
    ManifestCheck.DIGEST_MISMATCH: AdmissionReason.DIGEST_MISMATCH,
}


class NotSealed(RuntimeError):
    pass


@dataclass(frozen=True)
class WitnessRecord:
    decision_digest: bytes
    signature: bytes
    witness_key_id: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "decisionDigest": self.decision_digest.hex(),
            "signature": self.signature.hex(),
            "witnessKeyId": self.witness_key_id,
        }


def verify_witness_record(
    record: WitnessRecord, public_key: Ed25519PublicKey, decision_body: Mapping[str, Any] | None = None
) -> bool:
    """Check a witness record with nothing but the witness public key.

    When the decision body is supplied its digest must match too.
    """
    if decision_body is not None:
        if hashlib.sha256(canonicalize(decision_body)).digest() != record.decision_digest:
            return False
    try:
        public_key.verify(record.signature, record.decision_digest)
    except InvalidSignature:
        return False
    return True


@dataclass
class WitnessState:
    engaged: bool
    failed_closed: bool = False


class Witness:
    """In-process Ed25519 witness signer with an append-only journal."""

    def __init__(self, engaged: bool = True, journal_path: str | Path | None = None):
        self._key = Ed25519PrivateKey.generate()
        self.public_key = self._key.public_key()
        self.key_id = key_id(self.public_key)
        self.state = WitnessState(engaged=engaged, failed_closed=not engaged)
        self.journal_path = Path(journal_path) if journal_path is not None else None
        self._fh = None
        if self.journal_path is not None:
            self.journal_path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.journal_path, "ab")
        self.count = 0

    @property
    def available(self) -> bool:
        return self.state.engaged and not self.state.failed_closed

    def sign(self, decision_body: Mapping[str, Any]) -> WitnessRecord:
        digest = hashlib.sha256(canonicalize(decision_body)).digest()
        rec = WitnessRecord(digest, self._key.sign(digest), self.key_id)
        self.count += 1
        if self._fh is not None:
            line = canonicalize({**rec.to_dict(), "decision": dict(decision_body)})
            self._fh.write(line + b"\n")
            self._fh.flush()
        return rec

    def public_key_hex(self) -> str:
        return public_key_bytes(self.public_key).hex()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def verify_witness_journal(path: str | Path, public_key: Ed25519PublicKey) -> int | None:
    """Index of the first line whose signature or digest fails, else None."""
    for i, line in enumerate(ln for ln in Path(path).read_bytes().split(b"\n") if ln):
        try:
            obj = json.loads(line)
            rec = WitnessRecord(
                bytes.fromhex(obj["decisionDigest"]), bytes.fromhex(obj["signature"]), obj["witnessKeyId"]
            )
            ok = verify_witness_record(rec, public_key, obj["decision"])
        except (ValueError, KeyError, TypeError):
            ok = False
        if not ok:
            return i
    return None


@dataclass(frozen=True)
class AdmissionDecision:
    admitted: bool
    reason: AdmissionReason
    witness_record: WitnessRecord | None = None
    detail: str = ""


def admit_extension(
    runtime: Runtime,
    manifest: ModuleManifest,
    content: bytes,
    *,
    witness: Witness | None = None,
    channel: str | None = None,
    provider: str | None = None,
) -> AdmissionDecision:
    """Decide whether a signed extension may load.

    Passing a witness makes it mandatory: if it was not engaged at boot the
    gate fails closed for the rest of the run. Checks run in order: witness,
    manifest signature and digest, capability vocabulary, channel/provider
    allowlist. Every decision lands in the audit chain as ``gate.decision``.
    """
    if not runtime.sealed:
        raise NotSealed("admit_extension requires a sealed runtime")
    policy = runtime.policy

    reason = AdmissionReason.OK
    detail = ""
    if witness is not None and not witness.available:
        witness.state.failed_closed = True
        reason = AdmissionReason.WITNESS_UNAVAILABLE
    if reason is AdmissionReason.OK:
        check = verify_manifest(runtime.root, manifest, content)
        if check is not ManifestCheck.OK:
            reason = _MANIFEST_REASONS[check]
    if reason is AdmissionReason.OK:
        unknown = sorted(set(manifest.declared_capabilities) - VOCABULARY)
        if unknown:
            reason = AdmissionReason.UNDECLARED_CAPABILITY
            detail = ",".join(unknown)
    if reason is AdmissionReason.OK:
        if channel is not None and not is_channel_allowed(policy, channel):
            reason = AdmissionReason.CHANNEL_DENIED
            detail = f"channel:{channel}"
        elif provider is not None and not is_provider_allowed(policy, provider):
            reason = AdmissionReason.CHANNEL_DENIED
            detail = f"provider:{provider}"

    admitted = reason is AdmissionReason.OK
    body = {
        "kind": "admission",
        "extension": f"{manifest.name}@{manifest.version}",
        "declared": sorted(manifest.declared_capabilities),
        "signerKeyId": manifest.signer_key_id,
        "channel": channel,
        "provider": provider,
        "admitted": admitted,
        "reason": reason.value,
    }
    wrec = None
    if witness is not None and witness.available:
        wrec = witness.sign(body)
    payload = {
        **body,
        "cap": Capability.TOOL_INVOKE.value,
        "target": f"extension:{manifest.name}@{manifest.version}",
        "ok": admitted,
        "detail": detail,
    }
    if wrec is not None:
        payload["witness"] = wrec.to_dict()
    runtime.audit.append(audit.GATE_DECISION, payload)
    return AdmissionDecision(admitted, reason, wrec, detail)


class EgressReason(str, enum.Enum):
    ALLOW = "Allow"
    CAPABILITY_MISSING = "CapabilityMissing"
    VPN_ONLY = "VpnOnly"
    HOST_NOT_ALLOWED = "HostNotAllowed"


@dataclass(frozen=True)
class EgressDecision:
    reason: EgressReason

    @property
    def allowed(self) -> bool:
        return self.reason is EgressReason.ALLOW

    def __bool__(self) -> bool:
        return self.allowed


class PortOutOfRange(ValueError):
    pass


def _egress_decision(policy: Policy, host: str, granted: Iterable[Capability | str]) -> EgressDecision:
    caps = {Capability.parse(c) for c in granted}
    if Capability.NET_EGRESS not in caps:
        return EgressDecision(EgressReason.CAPABILITY_MISSING)
    if policy.vpn_only and host.lower().rstrip(".") != policy.vpn_gateway_host:
        return EgressDecision(EgressReason.VPN_ONLY)
    if not host_allowed(policy, host):
        return EgressDecision(EgressReason.HOST_NOT_ALLOWED)
    return EgressDecision(EgressReason.ALLOW)


def _audit_denial(chain, layer: str, host: str, port: int | None, decision: EgressDecision) -> None:
    if chain is None or decision.allowed:
        return
    chain.append(
        audit.EGRESS_DENIED,
        {
            "cap": Capability.NET_EGRESS.value,
            "target": host if port is None else f"{host}:{port}",
            "ok": False,
            "layer": layer,
            "reason": decision.reason.value,
        },
    )


def guard_egress_request(
    policy: Policy, target_host: str, granted_caps: Iterable[Capability | str], *, audit_chain=None
) -> EgressDecision:
    """Layer 1: the request-level wrapper."""
    decision = _egress_decision(policy, target_host, granted_caps)
    _audit_denial(audit_chain, "request", target_host, None, decision)
    return decision


def guard_raw_connect(
    policy: Policy, host: str, port: int, granted_caps: Iterable[Capability | str], *, audit_chain=None
) -> EgressDecision:
    """Layer 2: raw socket connect. Same table as layer 1, so bypassing
    the request wrapper cannot widen access."""
    if isinstance(port, bool) or not isinstance(port, int) or not 0 < port < 65536:
        raise PortOutOfRange(f"port {port!r} outside 1..65535")
    decision = _egress_decision(policy, host, granted_caps)
    _audit_denial(audit_chain, "socket", host, port, decision)
    return decision

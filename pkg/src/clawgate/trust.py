"""Module-signing trust root, signed manifests, and the bootstrap seal."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from . import audit
from .audit import AuditChain, canonicalize
from .policy import Policy


class TrustError(Exception):
    pass


class AlreadyLocked(TrustError):
    pass


class MutationAfterLock(TrustError):
    pass


class SealBeforeLock(TrustError):
    pass


class TamperAttempt(TrustError):
    """A post-seal mutation was attempted. It has already been audited."""


def public_key_bytes(key: Ed25519PublicKey) -> bytes:
    return key.public_bytes(Encoding.Raw, PublicFormat.Raw)


def key_id(key: Ed25519PublicKey) -> str:
    return hashlib.sha256(public_key_bytes(key)).hexdigest()[:16]


@dataclass(frozen=True)
class ModuleManifest:
    name: str
    version: str
    declared_capabilities: frozenset[str]
    content_digest: bytes
    signer_key_id: str
    signature: bytes = b""

    def body(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "version": self.version,
            "declaredCapabilities": sorted(self.declared_capabilities),
            "contentDigest": self.content_digest.hex(),
            "signerKeyId": self.signer_key_id,
        }

    def signing_bytes(self) -> bytes:
        return canonicalize(self.body())

    def to_dict(self) -> dict[str, Any]:
        return {**self.body(), "signature": self.signature.hex()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModuleManifest":
        return cls(
            name=data["name"],
            version=data["version"],
            declared_capabilities=frozenset(data["declaredCapabilities"]),
            content_digest=bytes.fromhex(data["contentDigest"]),
            signer_key_id=data["signerKeyId"],
            signature=bytes.fromhex(data.get("signature", "")),
        )


def sign_manifest(
    private_key: Ed25519PrivateKey,
    name: str,
    version: str,
    declared_capabilities: Iterable[str],
    content: bytes,
) -> ModuleManifest:
    unsigned = ModuleManifest(
        name=name,
        version=version,
        declared_capabilities=frozenset(str(getattr(c, "value", c)) for c in declared_capabilities),
        content_digest=hashlib.sha256(content).digest(),
        signer_key_id=key_id(private_key.public_key()),
    )
    sig = private_key.sign(unsigned.signing_bytes())
    return replace(unsigned, signature=sig)


def write_manifest(manifest: ModuleManifest, path: str | Path) -> None:
    Path(path).write_bytes(canonicalize(manifest.to_dict()) + b"\n")


def read_manifest(path: str | Path) -> ModuleManifest:
    return ModuleManifest.from_dict(json.loads(Path(path).read_bytes()))


class TrustRoot:
    def __init__(self, signers: Mapping[str, Ed25519PublicKey] | None = None):
        self._signers: dict[str, Ed25519PublicKey] = dict(signers or {})
        self._locked = False

    @property
    def locked(self) -> bool:
        return self._locked

    @property
    def signers(self) -> Mapping[str, Ed25519PublicKey]:
        return dict(self._signers)

    def add_signer(self, public_key: Ed25519PublicKey, signer_id: str | None = None) -> str:
        if self._locked:
            raise MutationAfterLock("trust root is locked")
        kid = signer_id or key_id(public_key)
        self._signers[kid] = public_key
        return kid

    def get(self, signer_id: str) -> Ed25519PublicKey | None:
        return self._signers.get(signer_id)

    def lock(self) -> "TrustRoot":
        if self._locked:
            raise AlreadyLocked("trust root already locked")
        self._locked = True
        return self


def lock_trust_root(root: TrustRoot) -> TrustRoot:
    return root.lock()


class ManifestCheck(str, enum.Enum):
    OK = "Ok"
    UNKNOWN_SIGNER = "UnknownSigner"
    BAD_SIGNATURE = "BadSignature"
    DIGEST_MISMATCH = "DigestMismatch"


def verify_manifest(root: TrustRoot, manifest: ModuleManifest, content: bytes) -> ManifestCheck:
    pub = root.get(manifest.signer_key_id)
    if pub is None:
        return ManifestCheck.UNKNOWN_SIGNER
    try:
        pub.verify(manifest.signature, manifest.signing_bytes())
    except (InvalidSignature, ValueError):
        return ManifestCheck.BAD_SIGNATURE
    if hashlib.sha256(content).digest() != manifest.content_digest:
        return ManifestCheck.DIGEST_MISMATCH
    return ManifestCheck.OK


@dataclass
class SealState:
    sealed: bool = False


class Runtime:
    """Boot-time bundle of trust root, policy, seal and audit chain.

    After ``seal_bootstrap`` every mutation attempt through this object is
    written to the audit chain as ``tamper.attempt`` and raises TamperAttempt.
    """

    def __init__(self, root: TrustRoot, policy: Policy, audit_chain: AuditChain | None = None):
        self.root = root
        self._policy = policy
        self.seal = SealState()
        self.audit = audit_chain if audit_chain is not None else AuditChain()

    @property
    def policy(self) -> Policy:
        return self._policy

    @property
    def sealed(self) -> bool:
        return self.seal.sealed

    def _tamper(self, what: str, detail: Mapping[str, Any]) -> None:
        self.audit.append(
            audit.TAMPER_ATTEMPT,
            {"cap": "tool.invoke", "target": f"runtime:{what}", "ok": False, "attempt": dict(detail)},
        )
        raise TamperAttempt(f"{what} is sealed")

    def set_policy(self, policy: Policy) -> None:
        if self.sealed:
            self._tamper("policy", {"op": "set_policy"})
        self._policy = policy

    def add_signer(self, public_key: Ed25519PublicKey, signer_id: str | None = None) -> str:
        if self.sealed:
            self._tamper("trust-root", {"op": "add_signer", "keyId": signer_id or key_id(public_key)})
        return self.root.add_signer(public_key, signer_id)


def seal_bootstrap(runtime: Runtime) -> SealState:
    if not runtime.root.locked:
        raise SealBeforeLock("lock the trust root before sealing")
    runtime.seal.sealed = True
    return runtime.seal

"""Capability vocabulary, Bell-LaPadula levels, and the channel/egress allowlist policy."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping


class Capability(str, enum.Enum):
    NET_EGRESS = "net.egress"
    FS_READ = "fs.read"
    FS_WRITE = "fs.write"
    TOOL_INVOKE = "tool.invoke"
    PUBLISH = "publish"
    PAY = "pay"
    PROC_EXEC = "proc.exec"
    SCHEDULE = "schedule"
    DEVICE_ACTUATE = "device.actuate"

    @classmethod
    def parse(cls, token: "str | Capability") -> "Capability":
        if isinstance(token, Capability):
            return token
        try:
            return cls(token)
        except ValueError:
            raise ValueError(f"unknown capability token {token!r}") from None


VOCABULARY = frozenset(c.value for c in Capability)


class ClassificationLevel(enum.IntEnum):
    PUBLIC = 0
    INTERNAL = 1
    CONFIDENTIAL = 2
    SECRET = 3


def dominates(a: ClassificationLevel, b: ClassificationLevel) -> bool:
    return a >= b


def can_read(clearance: ClassificationLevel, obj: ClassificationLevel) -> bool:
    # simple security property: no read up
    return dominates(clearance, obj)


def can_write(clearance: ClassificationLevel, obj: ClassificationLevel) -> bool:
    # star property: no write down
    return dominates(obj, clearance)


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class Policy:
    """Allowlists consulted by admission and egress. Empty sets deny everything."""

    allowed_channels: frozenset[str] = frozenset()
    allowed_providers: frozenset[str] = frozenset()
    egress_host_allowlist: frozenset[str] = frozenset()
    vpn_only: bool = False
    vpn_gateway_host: str | None = None
    clearance: ClassificationLevel = ClassificationLevel.INTERNAL

    def __post_init__(self) -> None:
        for name in ("allowed_channels", "allowed_providers", "egress_host_allowlist"):
            value = getattr(self, name)
            if not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))
        object.__setattr__(
            self, "egress_host_allowlist", frozenset(h.lower() for h in self.egress_host_allowlist)
        )
        if self.vpn_only and not self.vpn_gateway_host:
            raise PolicyError("vpn_only requires vpn_gateway_host")
        if self.vpn_gateway_host is not None:
            object.__setattr__(self, "vpn_gateway_host", self.vpn_gateway_host.lower())

    def to_dict(self) -> dict[str, Any]:
        return {
            "allowedChannels": sorted(self.allowed_channels),
            "allowedProviders": sorted(self.allowed_providers),
            "egressHostAllowlist": sorted(self.egress_host_allowlist),
            "vpnOnly": self.vpn_only,
            "vpnGatewayHost": self.vpn_gateway_host,
            "clearance": self.clearance.name.lower(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Policy":
        known = {
            "allowedChannels",
            "allowedProviders",
            "egressHostAllowlist",
            "vpnOnly",
            "vpnGatewayHost",
            "clearance",
        }
        unknown = set(data) - known
        if unknown:
            raise PolicyError(f"unknown policy keys: {sorted(unknown)}")
        clearance = data.get("clearance", "internal")
        try:
            level = ClassificationLevel[str(clearance).upper()]
        except KeyError:
            raise PolicyError(f"unknown classification level {clearance!r}") from None
        return cls(
            allowed_channels=frozenset(data.get("allowedChannels", ())),
            allowed_providers=frozenset(data.get("allowedProviders", ())),
            egress_host_allowlist=frozenset(data.get("egressHostAllowlist", ())),
            vpn_only=bool(data.get("vpnOnly", False)),
            vpn_gateway_host=data.get("vpnGatewayHost"),
            clearance=level,
        )


def load_policy(path: str | Path) -> Policy:
    return Policy.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def is_channel_allowed(policy: Policy, channel_id: str) -> bool:
    return channel_id in policy.allowed_channels


def is_provider_allowed(policy: Policy, provider_id: str) -> bool:
    return provider_id in policy.allowed_providers


def host_matches(pattern: str, host: str) -> bool:
    """Exact host, or ``*.suffix`` matching any strict subdomain of suffix."""
    host = host.lower().rstrip(".")
    pattern = pattern.lower()
    if pattern.startswith("*."):
        suffix = pattern[1:]
        return host.endswith(suffix) and len(host) > len(suffix)
    return host == pattern


def host_allowed(policy: Policy, host: str) -> bool:
    return any(host_matches(p, host) for p in policy.egress_host_allowlist)


def parse_capabilities(tokens: Iterable[str]) -> frozenset[Capability]:
    return frozenset(Capability.parse(t) for t in tokens)

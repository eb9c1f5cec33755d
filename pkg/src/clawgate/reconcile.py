"""Biconditional reconciliation of corpus delta D against audit projection S."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Tuple
from urllib.parse import urlsplit, urlunsplit

from .policy import Capability

MAX_COUNT = 2**31 - 1

Key = Tuple[str, str]


class SaturationError(OverflowError):
    pass


def canonical_target(target: str) -> str:
    """Canonical target identifier.

    URLs get a lowercased scheme and host, path-like targets are normalized
    with the platform path rules, anything else (channel ids) is verbatim.
    """
    if "://" in target:
        parts = urlsplit(target)
        if parts.scheme and parts.netloc:
            netloc = parts.netloc
            if "@" in netloc:
                userinfo, _, hostport = netloc.rpartition("@")
                netloc = f"{userinfo}@{hostport.lower()}"
            else:
                netloc = netloc.lower()
            return urlunsplit((parts.scheme.lower(), netloc, parts.path, parts.query, parts.fragment))
    if target.startswith(("/", "./", "../", "~")) or (os.sep != "/" and os.sep in target):
        return os.path.normpath(target)
    return target


def _key(cap: str | Capability, target: str) -> Key:
    return (Capability.parse(cap).value, canonical_target(target))


class KeyedMultiset(Mapping[Key, int]):
    """Multiset over (capability, target) with strictly positive counts."""

    def __init__(self, items: Mapping[Key, int] | Iterable[Key] | None = None, *, max_count: int = MAX_COUNT):
        self._counts: dict[Key, int] = {}
        self.max_count = max_count
        if items is None:
            return
        if isinstance(items, Mapping):
            for (cap, target), n in items.items():
                self.add(cap, target, n)
        else:
            for cap, target in items:
                self.add(cap, target)

    def add(self, cap: str | Capability, target: str, count: int = 1) -> None:
        if count < 0:
            raise ValueError("count must be non-negative")
        if count == 0:
            return
        k = _key(cap, target)
        n = self._counts.get(k, 0) + count
        if n > self.max_count:
            raise SaturationError(f"count for {k} exceeds {self.max_count}")
        self._counts[k] = n

    def __getitem__(self, key: Key) -> int:
        return self._counts[key]

    def get(self, key, default=0):
        return self._counts.get(key, default)

    def __iter__(self) -> Iterator[Key]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def total(self) -> int:
        return sum(self._counts.values())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, KeyedMultiset):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"({c}, {t}): {n}" for (c, t), n in sorted(self._counts.items()))
        return f"KeyedMultiset({{{inner}}})"

    def issubset(self, other: "KeyedMultiset") -> bool:
        return all(other.get(k, 0) >= n for k, n in self._counts.items())

    def to_list(self) -> list[dict]:
        return [{"cap": c, "target": t, "count": n} for (c, t), n in sorted(self._counts.items())]


def multiset_diff(a: KeyedMultiset, b: KeyedMultiset) -> KeyedMultiset:
    out = KeyedMultiset()
    for (cap, target), n in a.items():
        d = n - b.get((cap, target), 0)
        if d > 0:
            out.add(cap, target, d)
    return out


class VerdictKind(str, enum.Enum):
    OK = "ok"
    F1_BYPASS = "f1Bypass"
    F2_FORGERY = "f2Forgery"
    F4_WRONG_TARGET = "f4WrongTarget"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    d_minus_s: KeyedMultiset = field(default_factory=KeyedMultiset)
    s_minus_d: KeyedMultiset = field(default_factory=KeyedMultiset)

    @property
    def ok(self) -> bool:
        return self.kind is VerdictKind.OK

    @property
    def offending(self) -> int:
        """Number of (cap, target) elements that disagree, counted with multiplicity."""
        return self.d_minus_s.total() + self.s_minus_d.total()

    def describe(self) -> str:
        if self.ok:
            return "biconditional: ok"
        return f"biconditional: {self.kind.value} on {self.offending} (cap, target) projection(s)"


def check_biconditional(d: KeyedMultiset, s: KeyedMultiset) -> Verdict:
    d_minus_s = multiset_diff(d, s)
    s_minus_d = multiset_diff(s, d)
    if not d_minus_s and not s_minus_d:
        return Verdict(VerdictKind.OK)
    if d_minus_s and not s_minus_d:
        return Verdict(VerdictKind.F1_BYPASS, d_minus_s=d_minus_s)
    if s_minus_d and not d_minus_s:
        return Verdict(VerdictKind.F2_FORGERY, s_minus_d=s_minus_d)
    return Verdict(VerdictKind.F4_WRONG_TARGET, d_minus_s=d_minus_s, s_minus_d=s_minus_d)

"""Append-only, hash-chained audit journal.

Each record hashes as ``SHA-256(prev_hash || canonicalize(body))`` where the
body is every field except ``hash``. The journal file holds one canonical JSON
object per line (body fields plus ``hash``).
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

GENESIS_HASH = hashlib.sha256(b"clawgate-genesis-v1").digest()

EXECUTED = "irreversible.executed"
GATE_DECISION = "gate.decision"
TAMPER_ATTEMPT = "tamper.attempt"
MEDIATION_DECISION = "mediation.decision"
EGRESS_DENIED = "egress.denied"


class CanonError(ValueError):
    """Raised when a record body holds a value with no canonical form."""


def _check(value: Any, path: str) -> None:
    if value is None or isinstance(value, (bool, int, str)):
        return
    if isinstance(value, float):
        if not math.isfinite(value):
            raise CanonError(f"non-finite float at {path}")
        return
    if isinstance(value, Mapping):
        for k, v in value.items():
            if not isinstance(k, str):
                raise CanonError(f"non-string key {k!r} at {path}")
            _check(v, f"{path}.{k}")
        return
    if isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _check(v, f"{path}[{i}]")
        return
    raise CanonError(f"unserializable {type(value).__name__} at {path}")


def canonicalize(body: Mapping[str, Any]) -> bytes:
    """Key-sorted, minimal-whitespace UTF-8 JSON.

    Raises CanonError for anything JSON cannot carry losslessly (bytes,
    sets, NaN, non-string keys, lone surrogates).
    """
    _check(body, "$")
    try:
        text = json.dumps(
            body, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
        )
        return text.encode("utf-8")
    except (TypeError, ValueError, UnicodeEncodeError) as exc:
        raise CanonError(str(exc)) from exc


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    record_type: str
    payload: Mapping[str, Any]
    prev_hash: bytes
    hash: bytes

    def body(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "recordType": self.record_type,
            "payload": self.payload,
            "prevHash": self.prev_hash.hex(),
        }

    def compute_hash(self) -> bytes:
        return record_hash(self.prev_hash, self.body())

    def to_line(self) -> bytes:
        return canonicalize({**self.body(), "hash": self.hash.hex()})

    @classmethod
    def from_line(cls, line: bytes | str) -> "AuditRecord":
        obj = json.loads(line)
        return cls(
            seq=obj["seq"],
            record_type=obj["recordType"],
            payload=obj["payload"],
            prev_hash=bytes.fromhex(obj["prevHash"]),
            hash=bytes.fromhex(obj["hash"]),
        )


def record_hash(prev_hash: bytes, body: Mapping[str, Any]) -> bytes:
    return hashlib.sha256(prev_hash + canonicalize(body)).digest()


class AuditChain:
    """In-memory chain, optionally mirrored to a journal file flushed per append.

    Single writer. ``project_s`` and ``verify`` are read-only.
    """

    def __init__(self, journal_path: str | Path | None = None):
        self._records: list[AuditRecord] = []
        self._by_probe: dict[str, list[int]] = {}
        self.journal_path = Path(journal_path) if journal_path is not None else None
        self._fh = None
        if self.journal_path is not None:
            self.journal_path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.journal_path, "wb")

    @property
    def records(self) -> Sequence[AuditRecord]:
        return tuple(self._records)

    @property
    def head_hash(self) -> bytes:
        return self._records[-1].hash if self._records else GENESIS_HASH

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[AuditRecord]:
        return iter(self._records)

    def append(self, record_type: str, payload: Mapping[str, Any]) -> AuditRecord:
        payload = dict(payload)
        payload.setdefault("timestampMs", int(time.time() * 1000))
        prev = self.head_hash
        seq = len(self._records)
        body = {"seq": seq, "recordType": record_type, "payload": payload, "prevHash": prev.hex()}
        rec = AuditRecord(seq, record_type, payload, prev, record_hash(prev, body))
        self._records.append(rec)
        tag = payload.get("probeTag")
        if isinstance(tag, str):
            self._by_probe.setdefault(tag, []).append(seq)
        if self._fh is not None:
            self._fh.write(rec.to_line() + b"\n")
            self._fh.flush()
        return rec

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def verify(self) -> int | None:
        return verify_records(self._records)

    def count(self, record_type: str) -> int:
        return sum(1 for r in self._records if r.record_type == record_type)

    def project_s(self, probe_tag: str | None = None):
        if probe_tag is None:
            candidates: Iterable[AuditRecord] = self._records
        else:
            candidates = (self._records[i] for i in self._by_probe.get(probe_tag, ()))
        return project_s(candidates, probe_tag)

    def __enter__(self) -> "AuditChain":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def verify_records(records: Sequence[AuditRecord]) -> int | None:
    """Return None when the chain is intact, else the index of the first bad record."""
    prev = GENESIS_HASH
    for i, rec in enumerate(records):
        if rec.seq != i or rec.prev_hash != prev:
            return i
        try:
            if rec.compute_hash() != rec.hash:
                return i
        except CanonError:
            return i
        prev = rec.hash
    return None


def verify_chain(chain: AuditChain | Sequence[AuditRecord]) -> int | None:
    records = chain.records if isinstance(chain, AuditChain) else chain
    return verify_records(records)


def _parse_line(line: bytes) -> AuditRecord | None:
    try:
        rec = AuditRecord.from_line(line)
        # non-canonical encodings of the same values are tampering too
        if rec.to_line() != line:
            return None
        if not isinstance(rec.seq, int) or isinstance(rec.seq, bool):
            return None
        return rec
    except (ValueError, KeyError, TypeError, AttributeError, CanonError):
        return None


def verify_journal_lines(lines: Sequence[bytes]) -> int | None:
    prev = GENESIS_HASH
    for i, line in enumerate(lines):
        rec = _parse_line(line)
        if rec is None:
            return i
        if rec.seq != i or rec.prev_hash != prev:
            return i
        try:
            if rec.compute_hash() != rec.hash:
                return i
        except CanonError:
            return i
        prev = rec.hash
    return None


def read_journal_lines(path: str | Path) -> list[bytes]:
    data = Path(path).read_bytes()
    return [ln for ln in data.split(b"\n") if ln]


def verify_journal(path: str | Path) -> int | None:
    return verify_journal_lines(read_journal_lines(path))


def load_journal(path: str | Path) -> list[AuditRecord]:
    return [AuditRecord.from_line(ln) for ln in read_journal_lines(path)]


def project_s(records: Iterable[AuditRecord], probe_tag: str | None = None):
    """Multiset of (cap, target) over successful ``irreversible.executed`` records.

    ``ok = false`` records stay in the log but never count.
    """
    from .reconcile import KeyedMultiset

    out = KeyedMultiset()
    for rec in records:
        if rec.record_type != EXECUTED:
            continue
        p = rec.payload
        if p.get("ok") is not True:
            continue
        if probe_tag is not None and p.get("probeTag") != probe_tag:
            continue
        out.add(p["cap"], p["target"])
    return out


def record_type_counts(records: Iterable[AuditRecord]) -> Counter:
    return Counter(r.record_type for r in records)

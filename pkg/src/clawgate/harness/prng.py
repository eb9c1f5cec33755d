"""Seedable mulberry32 stream; the replay contract depends on its exact output."""

from __future__ import annotations

from typing import Sequence, TypeVar

T = TypeVar("T")

_MASK = 0xFFFFFFFF


def fnv1a32(data: bytes) -> int:
    h = 0x811C9DC5
    for byte in data:
        h ^= byte
        h = (h * 0x01000193) & _MASK
    return h


def seed_from_string(seed: str) -> int:
    return fnv1a32(seed.encode("utf-8"))


class Mulberry32:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u32(self) -> int:
        self.state = (self.state + 0x6D2B79F5) & _MASK
        t = self.state
        t = ((t ^ (t >> 15)) * (t | 1)) & _MASK
        t ^= (t + ((t ^ (t >> 7)) * (t | 61))) & _MASK
        return (t ^ (t >> 14)) & _MASK

    def random(self) -> float:
        return self.next_u32() / 4294967296.0

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + int(self.random() * (hi - lo + 1))

    def choice(self, seq: Sequence[T]) -> T:
        return seq[int(self.random() * len(seq))]

    def chars(self, alphabet: str, n: int) -> str:
        return "".join(alphabet[int(self.random() * len(alphabet))] for _ in range(n))


def seed_prng(seed_string: str) -> Mulberry32:
    return Mulberry32(seed_from_string(seed_string))

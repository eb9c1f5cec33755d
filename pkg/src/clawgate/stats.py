"""Wilson score intervals, continuity-corrected McNemar, confusion matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Optional

Z95 = 1.959964


class DomainError(ValueError):
    pass


def z_for(confidence: float) -> float:
    if confidence == 0.95:
        return Z95
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must be in (0, 1), got {confidence}")
    return NormalDist().inv_cdf(1.0 - (1.0 - confidence) / 2.0)


@dataclass(frozen=True)
class WilsonInterval:
    low: float
    high: float
    k: int
    n: int
    z: float

    @property
    def point(self) -> float:
        return self.k / self.n

    def fmt(self, digits: int = 2) -> str:
        return f"{self.point:.3f} [{self.low:.{digits}f}, {self.high:.{digits}f}]"


def wilson(k: int, n: int, confidence: float = 0.95) -> WilsonInterval:
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    z = z_for(confidence)
    z2 = z * z
    center = (k + z2 / 2.0) / (n + z2)
    half = z / (n + z2) * math.sqrt(k * (n - k) / n + z2 / 4.0)
    low = min(max(center - half, 0.0), 1.0)
    high = min(max(center + half, 0.0), 1.0)
    # rounding can push the k=0 / k=n edge a hair past the point estimate
    if k == 0:
        low = 0.0
    if k == n:
        high = 1.0
    return WilsonInterval(low, high, k, n, z)


def mcnemar(b: int, c: int) -> float:
    """Continuity-corrected statistic ``(|b - c| - 1)^2 / (b + c)``; 0 when b + c = 0.

    |b - c| - 1 is not clamped, so b = c > 0 gives 1 / (b + c).
    """
    if b < 0 or c < 0:
        raise DomainError("disagreement counts must be non-negative")
    if b + c == 0:
        return 0.0
    return (abs(b - c) - 1) ** 2 / (b + c)


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def fpr(self) -> Optional[float]:
        return _ratio(self.fp, self.fp + self.tn)

    @property
    def accuracy(self) -> Optional[float]:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def f1(self) -> Optional[float]:
        p, r = self.precision, self.recall
        if p is None or r is None:
            return None
        if p + r == 0:
            return 0.0
        return 2 * p * r / (p + r)

    def recall_interval(self) -> Optional[WilsonInterval]:
        n = self.tp + self.fn
        return wilson(self.tp, n) if n else None

    def fpr_interval(self) -> Optional[WilsonInterval]:
        n = self.fp + self.tn
        return wilson(self.fp, n) if n else None


def fmt_metric(value: Optional[float]) -> str:
    return "--" if value is None else f"{value:.3f}"


ADVERSARIAL = "adversarial"
LEGIT = "legit"


def confusion(samples: Iterable[tuple[str, bool]]) -> ConfusionMatrix:
    """Build a matrix from (label, blocked) pairs."""
    tp = fp = tn = fn = 0
    for label, blocked in samples:
        if label == ADVERSARIAL:
            if blocked:
                tp += 1
            else:
                fn += 1
        elif label == LEGIT:
            if blocked:
                fp += 1
            else:
                tn += 1
        else:
            raise ValueError(f"unknown label {label!r}")
    return ConfusionMatrix(tp, fp, tn, fn)

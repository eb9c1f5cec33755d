from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import templates as T
from .prng import Mulberry32

DISCORD = "discord-mock"
TELEGRAM = "telegram-mock"
CHANNELS = (DISCORD, TELEGRAM)

ADVERSARIAL = "adversarial"
LEGIT = "legit"

PASSTHROUGH = "passthrough"
GATED = "gated"
GATED_WITNESS = "gated-witness"
SUBJECTS = (PASSTHROUGH, GATED, GATED_WITNESS)

STRESS_N = 10_000


@dataclass(frozen=True)
class Sample:
    id: str
    channel: str
    f_category: str
    label: str
    content: str
    probe_tag: str | None = None

    @property
    def cell(self) -> str:
        return T.CELL_OF[self.f_category]


@dataclass
class RunConfig:
    n_per_cell: int = 100
    channels: list[str] = field(default_factory=lambda: list(CHANNELS))
    seed_string: str | None = None
    stats_only: bool = False
    disable_witness: bool = False
    widened_dlp: bool = False
    out_dir: Path = Path("clawgate-out")
    subjects: list[str] = field(default_factory=lambda: list(SUBJECTS))
    pace_ms: int = 0
    policy_path: Path | None = None

    def __post_init__(self) -> None:
        if self.n_per_cell < 1:
            raise ValueError("n_per_cell must be >= 1")
        unknown = set(self.channels) - set(CHANNELS)
        if unknown:
            raise ValueError(f"unknown channels: {sorted(unknown)}")
        unknown = set(self.subjects) - set(SUBJECTS)
        if unknown:
            raise ValueError(f"unknown subjects: {sorted(unknown)}")
        self.out_dir = Path(self.out_dir)


def generate_samples(config: RunConfig, rng: Mulberry32) -> list[Sample]:
    """Balanced sample list: per (channel, F-category) cell, n adversarial then
    n legit, interleaved. The PRNG draw order is part of the replay contract."""
    samples: list[Sample] = []
    probe_serial = 0

    def probe() -> str:
        nonlocal probe_serial
        probe_serial += 1
        return f"probe-{probe_serial:06d}-{rng.next_u32():08x}"

    for channel in config.channels:
        for fcat in T.F_CATEGORIES:
            legit_family = T.LEGIT_FOR[fcat]
            for i in range(config.n_per_cell):
                base = f"{channel}:{fcat}:{i:05d}"
                if fcat == T.F2_FORGE:
                    tag = probe()
                    adv = Sample(f"{base}:adv", channel, fcat, ADVERSARIAL, T.audit_line(rng, tag), tag)
                else:
                    adv = Sample(f"{base}:adv", channel, fcat, ADVERSARIAL, T.ADVERSARIAL_GENERATORS[fcat](rng))
                if legit_family == T.LEGIT_AUDIT:
                    tag = probe()
                    leg = Sample(f"{base}:leg", channel, legit_family, LEGIT, T.audit_line(rng, tag), tag)
                else:
                    leg = Sample(f"{base}:leg", channel, legit_family, LEGIT, T.LEGIT_GENERATORS[legit_family](rng))
                samples.append(adv)
                samples.append(leg)
    return samples

"""End-to-end experiment: generate, mediate through every subject, report."""

from __future__ import annotations

import secrets
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .. import audit
from ..detectors.dlp import strict_catalog, widened_catalog
from ..gatekeeper import AdmissionDecision, Witness, verify_witness_journal
from ..policy import load_policy
from ..stats import ConfusionMatrix, confusion
from . import templates as T
from .prng import seed_prng
from .report import (
    Fingerprint,
    McNemarRow,
    collect_fingerprint,
    headline_table,
    mcnemar_pairs,
    render_markdown,
    write_samples_csv,
)
from .samples import GATED_WITNESS, PASSTHROUGH, RunConfig, Sample, generate_samples
from .subjects import ChannelSink, Decision, GatedSubject, GateInput, PassthroughSubject, default_policy

CellKey = tuple[str, str, str]


@dataclass
class ReportBundle:
    config: RunConfig
    fingerprint: Fingerprint
    samples: list[Sample]
    subjects: list[str]
    decisions: dict[str, list[Decision]]
    cells: dict[CellKey, ConfusionMatrix]
    aggregate: dict[tuple[str, str], ConfusionMatrix]
    overall: dict[str, ConfusionMatrix]
    mcnemar: list[McNemarRow]
    admissions: dict[str, list[AdmissionDecision]]
    fail_closed_subjects: list[str]
    chain_ok: dict[str, bool]
    chain_records: dict[str, int]
    record_types: dict[str, Counter]
    public_keys: dict[str, str]
    csv_path: Path
    csv_digest: str
    report_path: Path
    elapsed_s: float
    sinks: dict[str, ChannelSink] = field(default_factory=dict)

    @property
    def seed_string(self) -> str:
        return self.fingerprint.seed_string

    @property
    def ok(self) -> bool:
        return all(self.chain_ok.values())

    def mcnemar_for(self, first: str, second: str) -> McNemarRow:
        for row in self.mcnemar:
            if {row.first, row.second} == {first, second}:
                return row
        raise KeyError((first, second))


def _build_subject(name: str, config: RunConfig, sinks, policy, catalog):
    if name == PASSTHROUGH:
        return PassthroughSubject(name, sinks)
    witness = None
    if name == GATED_WITNESS:
        witness = Witness(engaged=not config.disable_witness, journal_path=config.out_dir / "witness.jsonl")
    return GatedSubject(
        name, sinks, policy, catalog, audit_path=config.out_dir / f"audit-{name}.jsonl", witness=witness
    )


def run_experiment(config: RunConfig, *, echo: bool = False) -> ReportBundle:
    started = time.perf_counter()
    seed = config.seed_string if config.seed_string is not None else secrets.token_hex(8)
    fingerprint = collect_fingerprint(seed)

    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    for stale in [out_dir / "witness.jsonl", *(out_dir / f"audit-{s}.jsonl" for s in config.subjects)]:
        stale.unlink(missing_ok=True)

    samples = generate_samples(config, seed_prng(seed))
    policy = load_policy(config.policy_path) if config.policy_path else default_policy(config.channels)
    catalog = widened_catalog() if config.widened_dlp else strict_catalog()
    sinks = {ch: ChannelSink(ch, keep_posts=not config.stats_only, pace_ms=config.pace_ms) for ch in config.channels}

    subjects = {name: _build_subject(name, config, sinks, policy, catalog) for name in config.subjects}
    decisions: dict[str, list[Decision]] = {name: [] for name in subjects}
    try:
        for sample in samples:
            gi = GateInput.from_sample(sample)
            for name, subj in subjects.items():
                subj.perform(sample)
                decisions[name].append(subj.mediate(gi))
    finally:
        for subj in subjects.values():
            subj.close()

    cells: dict[CellKey, ConfusionMatrix] = {}
    for name in subjects:
        buckets: dict[CellKey, list[tuple[str, bool]]] = {}
        for s, d in zip(samples, decisions[name]):
            buckets.setdefault((name, s.channel, s.cell), []).append((s.label, not d.delivered))
        for ch in config.channels:
            for cell in T.F_CATEGORIES:
                cells[(name, ch, cell)] = confusion(buckets.get((name, ch, cell), []))
    aggregate = {
        (name, cell): sum((cells[(name, ch, cell)] for ch in config.channels), ConfusionMatrix())
        for name in subjects
        for cell in T.F_CATEGORIES
    }
    overall = {name: sum((aggregate[(name, c)] for c in T.F_CATEGORIES), ConfusionMatrix()) for name in subjects}

    chain_ok: dict[str, bool] = {}
    chain_records: dict[str, int] = {}
    record_types: dict[str, Counter] = {}
    admissions: dict[str, list[AdmissionDecision]] = {}
    public_keys: dict[str, str] = {}
    fail_closed = []
    for name, subj in subjects.items():
        if not isinstance(subj, GatedSubject):
            continue
        journal = out_dir / f"audit-{name}.jsonl"
        ok = subj.audit.verify() is None and audit.verify_journal(journal) is None
        if subj.witness is not None:
            public_keys[f"{name} witness"] = subj.witness.public_key_hex()
            ok = ok and verify_witness_journal(subj.witness.journal_path, subj.witness.public_key) is None
            if subj.fail_closed:
                fail_closed.append(name)
        chain_ok[name] = ok
        chain_records[name] = len(subj.audit)
        record_types[name] = audit.record_type_counts(subj.audit.records)
        admissions[name] = list(subj.admissions.values())
        public_keys[f"{name} publisher"] = subj.publisher_public_key

    subject_names = list(subjects)
    csv_path = out_dir / "samples.csv"
    digest = write_samples_csv(csv_path, samples, decisions, subject_names)

    bundle = ReportBundle(
        config=config,
        fingerprint=fingerprint,
        samples=samples,
        subjects=subject_names,
        decisions=decisions,
        cells=cells,
        aggregate=aggregate,
        overall=overall,
        mcnemar=mcnemar_pairs(samples, decisions, subject_names),
        admissions=admissions,
        fail_closed_subjects=fail_closed,
        chain_ok=chain_ok,
        chain_records=chain_records,
        record_types=record_types,
        public_keys=public_keys,
        csv_path=csv_path,
        csv_digest=digest,
        report_path=out_dir / "report.md",
        elapsed_s=0.0,
        sinks=sinks,
    )
    bundle.elapsed_s = time.perf_counter() - started
    bundle.report_path.write_text(render_markdown(bundle) + "\n", encoding="utf-8")
    if echo:
        print(f"seed: {seed}")
        print(headline_table(bundle))
        for row in bundle.mcnemar:
            print(f"mcnemar {row.first} vs {row.second}: b={row.b} c={row.c} chi2={row.chi2:.6f}")
        print(f"chains: {'ok' if bundle.ok else 'FAILED'}  report: {bundle.report_path}")
    return bundle

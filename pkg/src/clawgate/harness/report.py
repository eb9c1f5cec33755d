"""Run fingerprint, per-sample CSV and the markdown report."""

from __future__ import annotations

import csv
import hashlib
import io
import os
import platform
import subprocess
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from ..stats import ConfusionMatrix, fmt_metric, mcnemar
from . import templates as T
from .samples import PASSTHROUGH, Sample
from .subjects import Decision

if TYPE_CHECKING:
    from .runner import ReportBundle

DIGEST_PREFIX = "# sha256="


@dataclass(frozen=True)
class Fingerprint:
    runtime_version: str
    os_name: str
    cpu_model: str
    cpu_count: int
    total_ram_bytes: int
    source_commit: str
    seed_string: str


def _cpu_model() -> str:
    try:
        with open("/proc/cpuinfo", encoding="utf-8") as fh:
            for line in fh:
                if line.lower().startswith(("model name", "hardware", "cpu model")):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return platform.processor() or platform.machine() or "unknown"


def _total_ram() -> int:
    try:
        return os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (ValueError, OSError, AttributeError):
        return 0


def _source_commit() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def collect_fingerprint(seed_string: str) -> Fingerprint:
    return Fingerprint(
        runtime_version=f"Python {platform.python_version()} ({sys.implementation.name})",
        os_name=f"{platform.system()} {platform.release()}",
        cpu_model=_cpu_model(),
        cpu_count=os.cpu_count() or 0,
        total_ram_bytes=_total_ram(),
        source_commit=_source_commit(),
        seed_string=seed_string,
    )


# ---- CSV ---------------------------------------------------------------

BASE_COLUMNS = ["id", "channel", "f_category", "label", "content", "probe_tag"]


def csv_columns(subjects: list[str]) -> list[str]:
    cols = list(BASE_COLUMNS)
    for s in subjects:
        cols += [f"{s}_delivered", f"{s}_block_reason"]
    return cols


def render_csv_body(samples: list[Sample], decisions: dict[str, list[Decision]], subjects: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns(subjects))
    for i, s in enumerate(samples):
        row = [s.id, s.channel, s.f_category, s.label, s.content, s.probe_tag or ""]
        for subj in subjects:
            d = decisions[subj][i]
            row += ["true" if d.delivered else "false", d.block_reason or ""]
        w.writerow(row)
    return buf.getvalue()


def content_digest(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def write_samples_csv(path: Path, samples, decisions, subjects) -> str:
    """Write the per-sample CSV; the last line carries the body digest."""
    body = render_csv_body(samples, decisions, subjects)
    digest = content_digest(body)
    path.write_text(body + f"{DIGEST_PREFIX}{digest}\n", encoding="utf-8")
    return digest


def read_csv_digest(path: Path) -> str | None:
    for line in reversed(Path(path).read_text(encoding="utf-8").splitlines()):
        if line.startswith(DIGEST_PREFIX):
            return line[len(DIGEST_PREFIX):]
    return None


def split_digest_line(text: str) -> tuple[str, str | None]:
    """Separate the CSV body from its trailing digest comment, if any."""
    lines = text.splitlines(keepends=True)
    if lines and lines[-1].startswith(DIGEST_PREFIX):
        return "".join(lines[:-1]), lines[-1].strip()[len(DIGEST_PREFIX):]
    return text, None


# ---- comparisons -------------------------------------------------------


@dataclass(frozen=True)
class McNemarRow:
    first: str
    second: str
    b: int  # first wrong, second right
    c: int  # first right, second wrong
    chi2: float


def _correct(sample: Sample, d: Decision) -> bool:
    return d.delivered != (sample.label == "adversarial")


def mcnemar_pairs(samples: list[Sample], decisions: dict[str, list[Decision]], subjects: list[str]) -> list[McNemarRow]:
    rows = []
    for i, a in enumerate(subjects):
        for bname in subjects[i + 1:]:
            b = c = 0
            for k, s in enumerate(samples):
                ra, rb = _correct(s, decisions[a][k]), _correct(s, decisions[bname][k])
                if not ra and rb:
                    b += 1
                elif ra and not rb:
                    c += 1
            rows.append(McNemarRow(a, bname, b, c, mcnemar(b, c)))
    return rows


# ---- markdown ----------------------------------------------------------

_MATRIX_HEADER = "| subject | cell | TP | FP | TN | FN | precision | recall | F1 | accuracy |"
_MATRIX_RULE = "|---|---|---:|---:|---:|---:|---:|---:|---:|---:|"


def _matrix_row(subject: str, cell: str, cm: ConfusionMatrix, channel: str | None = None) -> str:
    lead = f"| {subject} | {channel} | {cell} |" if channel else f"| {subject} | {cell} |"
    return (
        f"{lead} {cm.tp} | {cm.fp} | {cm.tn} | {cm.fn} | "
        f"{fmt_metric(cm.precision)} | {fmt_metric(cm.recall)} | {fmt_metric(cm.f1)} | {fmt_metric(cm.accuracy)} |"
    )


def headline_table(bundle: "ReportBundle") -> str:
    lines = [_MATRIX_HEADER, _MATRIX_RULE]
    for subj in bundle.subjects:
        label = subj + (" (FAIL-CLOSED)" if subj in bundle.fail_closed_subjects else "")
        for cell in T.F_CATEGORIES:
            lines.append(_matrix_row(label, cell, bundle.aggregate[(subj, cell)]))
        lines.append(_matrix_row(label, "all", bundle.overall[subj]))
    return "\n".join(lines)


def render_markdown(bundle: "ReportBundle") -> str:
    cfg = bundle.config
    fp = bundle.fingerprint
    out = ["# clawgate adversarial run", ""]

    out += ["## Fingerprint", "", "| field | value |", "|---|---|"]
    for k, v in asdict(fp).items():
        out.append(f"| {k} | {v} |")
    out += [""]

    out += ["## Configuration", "", "| setting | value |", "|---|---|"]
    out.append(f"| samples | {len(bundle.samples)} |")
    out.append(f"| n per cell | {cfg.n_per_cell} |")
    out.append(f"| channels | {', '.join(cfg.channels)} |")
    out.append(f"| subjects | {', '.join(bundle.subjects)} |")
    out.append(f"| DLP catalog | {'widened' if cfg.widened_dlp else 'strict'} |")
    out.append(f"| witness | {'disabled' if cfg.disable_witness else 'engaged'} |")
    out.append(f"| stats only | {cfg.stats_only} |")
    out.append(f"| elapsed seconds | {bundle.elapsed_s:.1f} |")
    out.append(f"| samples.csv sha256 | {bundle.csv_digest} |")
    out += [""]

    for subj in bundle.fail_closed_subjects:
        reasons = sorted({a.reason.value for a in bundle.admissions.get(subj, [])})
        admitted = sum(a.admitted for a in bundle.admissions.get(subj, []))
        out.append(
            f"> **{subj}: FAIL-CLOSED.** Witness unavailable at boot; {admitted} extensions admitted; "
            f"admission reasons: {', '.join(reasons) or 'none'}. Every sample in its cells was blocked "
            "before reaching a channel."
        )
        out.append("")

    out += ["## Headline matrix (all channels)", "", headline_table(bundle), ""]

    out += ["## Per-channel cells", "", _MATRIX_HEADER.replace("| cell |", "| channel | cell |"), "|---" + _MATRIX_RULE]
    for subj in bundle.subjects:
        for ch in cfg.channels:
            for cell in T.F_CATEGORIES:
                out.append(_matrix_row(subj, cell, bundle.cells[(subj, ch, cell)], channel=ch))
    out += [""]

    out += [
        "## Wilson 95% intervals",
        "",
        "| subject | channel | cell | recall [low, high] | FPR [low, high] | FPR upper |",
        "|---|---|---|---|---|---:|",
    ]
    for subj in bundle.subjects:
        for ch in cfg.channels:
            for cell in T.F_CATEGORIES:
                cm = bundle.cells[(subj, ch, cell)]
                r, f = cm.recall_interval(), cm.fpr_interval()
                out.append(
                    f"| {subj} | {ch} | {cell} | {r.fmt(4) if r else '--'} | {f.fmt(6) if f else '--'} | "
                    f"{f'{f.high:.4e}' if f else '--'} |"
                )
    out += [""]

    out += [
        "## McNemar (continuity-corrected)",
        "",
        "b counts samples the first subject got wrong and the second got right; c the reverse.",
        "",
        "| first | second | b | c | chi2 |",
        "|---|---|---:|---:|---:|",
    ]
    for row in bundle.mcnemar:
        out.append(f"| {row.first} | {row.second} | {row.b} | {row.c} | {row.chi2:.6f} |")
    out += [""]

    out += ["## Audit chains", "", "| subject | records | verified | record types |", "|---|---:|---|---|"]
    for subj in bundle.subjects:
        if subj == PASSTHROUGH or subj not in bundle.chain_records:
            out.append(f"| {subj} | 0 | n/a (no audit) | -- |")
            continue
        counts = ", ".join(f"{k}={v}" for k, v in sorted(bundle.record_types[subj].items()))
        out.append(f"| {subj} | {bundle.chain_records[subj]} | {'ok' if bundle.chain_ok[subj] else 'FAILED'} | {counts} |")
    out += [""]

    out += ["## Public keys", "", "| role | ed25519 public key (hex) |", "|---|---|"]
    for role, key in sorted(bundle.public_keys.items()):
        out.append(f"| {role} | {key} |")
    out += [""]
    return "\n".join(out)

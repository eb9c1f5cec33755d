"""Publish-safety scrub for the per-sample CSV."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from ..detectors.dlp import DlpCatalog, blocking_findings, scrub_text, widened_catalog
from .report import DIGEST_PREFIX, content_digest, split_digest_line


class ScrubError(RuntimeError):
    pass


def scrub_csv(csv_path: str | Path, catalog: DlpCatalog | None = None, out_path: str | Path | None = None) -> Path:
    """Redact the content column; every other column passes through untouched.

    The output defaults to ``<stem>.scrubbed.csv`` next to the input. If the
    input carries a digest line it is recomputed over the scrubbed body, so
    a file with nothing to redact comes out byte-identical.
    """
    csv_path = Path(csv_path)
    catalog = catalog or widened_catalog()
    out_path = Path(out_path) if out_path else csv_path.with_name(csv_path.stem + ".scrubbed.csv")

    body, digest = split_digest_line(csv_path.read_text(encoding="utf-8"))
    rows = list(csv.reader(io.StringIO(body, newline="")))
    if not rows:
        out_path.write_text("", encoding="utf-8")
        return out_path
    try:
        col = rows[0].index("content")
    except ValueError:
        raise ScrubError(f"{csv_path}: no 'content' column") from None

    for row in rows[1:]:
        if col < len(row):
            row[col] = scrub_text(row[col], catalog)
            if blocking_findings(row[col], catalog):
                raise ScrubError(f"{csv_path}: residual finding after scrub in row {row[0]!r}")

    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    new_body = buf.getvalue()
    text = new_body
    if digest is not None:
        text += f"{DIGEST_PREFIX}{content_digest(new_body)}\n"
    out_path.write_text(text, encoding="utf-8")
    return out_path
